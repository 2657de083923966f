#pragma once

#include "ctxr/volume.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ctxr {

// All geometry is in voxel index coordinates; a voxel belongs to a shape when
// its centre (integer index) satisfies the shape inequality.

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
    bool operator==(const Vec3&) const = default;
};

struct Ellipsoid {
    Vec3 center;
    Vec3 radii;
    bool operator==(const Ellipsoid&) const = default;
};

/// Elliptic cylinder along the axial axis, z0 <= z <= z1.
struct EllipticCylinder {
    double cx = 0.0, cy = 0.0;
    double rx = 0.0, ry = 0.0;
    double z0 = 0.0, z1 = 0.0;
    bool operator==(const EllipticCylinder&) const = default;
};

struct AxisBox {
    Vec3 lo;
    Vec3 hi;  // inclusive
    bool operator==(const AxisBox&) const = default;
};

/// Stack of axial cylinders, one per level, separated by `gap` slices.
struct SpineSpec {
    double x = 0.0, y = 0.0;
    double radius = 0.0;
    double z_top = 0.0;
    double level_height = 0.0;
    double gap = 0.0;
    std::vector<std::string> levels;  // e.g. "C7", "T1", ...
    std::vector<double> lateral_offsets;  // one per level, added to x

    double level_top(std::size_t i) const { return z_top + static_cast<double>(i) * (level_height + gap); }
    double level_center(std::size_t i) const { return level_top(i) + (level_height - 1.0) / 2.0; }
    double length() const;
    bool operator==(const SpineSpec&) const = default;
};

/// Posterior rib arcs: per pair, an axial slab of `thickness` slices cut from
/// the ring between two concentric ellipses, posterior half only, excluding a
/// central gap around the spine.
struct RibSpec {
    int pairs = 12;
    double cx = 0.0, cy = 0.0;
    double inner_rx = 0.0, inner_ry = 0.0;
    double outer_rx = 0.0, outer_ry = 0.0;
    double z_top = 0.0;
    double spacing = 0.0;
    double thickness = 0.0;
    double spine_gap = 0.0;  // half-width around cx left free
    bool operator==(const RibSpec&) const = default;
};

/// Horizontal cylinders along x, one per side, from |x - cx| = x_inner to x_outer.
struct ClavicleSpec {
    double cx = 0.0;
    double y = 0.0, z = 0.0;
    double radius = 0.0;
    double x_inner = 0.0, x_outer = 0.0;
    bool operator==(const ClavicleSpec&) const = default;
};

/// Vertical tube down to `bifurcation_z`, then two straight bronchi descending
/// at 45 degrees to either side for `bronchus_drop` slices.
struct TracheaSpec {
    double x = 0.0, y = 0.0;
    double radius = 0.0;
    double z_top = 0.0;
    double bifurcation_z = 0.0;
    double bronchus_drop = 0.0;
    bool operator==(const TracheaSpec&) const = default;
};

/// Ascending and descending tubes joined by a half-torus arch on top.
struct AortaSpec {
    bool enabled = true;
    double x_ascending = 0.0, x_descending = 0.0;
    double y = 0.0;
    double z_arch = 0.0;  // centre row of the arch
    double radius = 0.0;
    double z_ascending_end = 0.0;
    double z_descending_end = 0.0;
    bool operator==(const AortaSpec&) const = default;
};

struct PhantomHu {
    double air = -1000.0;
    double soft_tissue = 40.0;
    double lung = -800.0;
    double trachea = -900.0;
    double heart = 40.0;
    double vertebra = 700.0;
    double rib = 500.0;
    double clavicle = 500.0;
    double table = 300.0;
    bool operator==(const PhantomHu&) const = default;
};

struct PhantomSpec {
    GridSpec grid;
    std::uint64_t seed = 0;
    double noise_hu = 0.0;  // uniform integer noise in [-noise_hu, noise_hu]; 0 disables
    bool table = true;
    AxisBox table_box;
    EllipticCylinder body;
    Ellipsoid lung_left;   // patient left: larger x
    Ellipsoid lung_right;
    Ellipsoid heart;
    SpineSpec spine;
    RibSpec ribs;
    ClavicleSpec clavicles;
    TracheaSpec trachea;
    AxisBox subdiaphragm;  // intersected with the body
    AxisBox mediastinum;
    AortaSpec aorta;
    PhantomHu hu;

    /// Reference thorax scaled to `dims` (geometry is laid out for 256^3 and
    /// scaled per axis). At 256^3 the heart half-width is 50 and the outer
    /// lung half-width 125 voxels.
    static PhantomSpec standard(Dims3 dims = {256, 256, 256});

    /// Throws Error(spec) naming the first shape that leaves the grid.
    void validate() const;
    bool operator==(const PhantomSpec&) const = default;
};

struct Phantom {
    Volume volume;
    LabelVolume labels;
};

Phantom generate_phantom(const PhantomSpec& spec);

/// Adds amplitude * sin(2 pi (z_c - z_top) / wavelength) to each vertebra's
/// lateral offset, z_c being the level centre. Amplitude 0 returns the spec unchanged.
PhantomSpec scoliosis_variant(const PhantomSpec& spec, double amplitude, double wavelength);

/// Heart x radius set to `half_width`.
PhantomSpec enlarged_heart_variant(const PhantomSpec& spec, double half_width);

/// Mirror-symmetric layout: heart centred on the midline, aorta disabled.
PhantomSpec symmetric_variant(const PhantomSpec& spec);

/// Seeded uniform perturbation of organ positions (up to `amount` voxels) and
/// sizes (up to `amount / 2`). The result carries `seed` as its noise seed.
PhantomSpec jitter_spec(const PhantomSpec& spec, std::uint64_t seed, double amount);

std::string phantom_spec_to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(const std::string& text);

} // namespace ctxr
