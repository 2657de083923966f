#pragma once

#include "ctxr/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ctxr {

enum class ScalarType : std::uint8_t { uint8, int16, float32 };

std::string to_string(ScalarType type);
ScalarType parse_scalar_type(const std::string& name);

/// Intensity window in Hounsfield units. The default is the 12-bit CT range.
struct HuWindow {
    double lo = -1024.0;
    double hi = 3071.0;

    void validate() const;
    bool operator==(const HuWindow&) const = default;
};

/// CT volume in Hounsfield units. `stored_as` records the on-disk scalar type
/// the volume came from (or should be written as).
struct Volume {
    GridSpec grid;
    std::vector<float> data;
    ScalarType stored_as = ScalarType::int16;

    Volume() = default;
    Volume(GridSpec g, float fill = 0.0f);

    float& at(std::size_t x, std::size_t y, std::size_t z) { return data[grid.index(x, y, z)]; }
    float at(std::size_t x, std::size_t y, std::size_t z) const { return data[grid.index(x, y, z)]; }
    const Dims3& dims() const { return grid.dims; }

    /// Throws if dims do not match the payload or spacing is not positive.
    void validate() const;
    bool operator==(const Volume&) const = default;
};

Volume clip_hu(const Volume& volume, double lo, double hi);
inline Volume clip_hu(const Volume& volume, const HuWindow& window)
{
    return clip_hu(volume, window.lo, window.hi);
}

struct Box3 {
    std::size_t x0 = 0, y0 = 0, z0 = 0;
    Dims3 dims;

    bool contains(std::size_t x, std::size_t y, std::size_t z) const
    {
        return x >= x0 && y >= y0 && z >= z0 && x - x0 < dims.nx && y - y0 < dims.ny &&
               z - z0 < dims.nz;
    }
    bool operator==(const Box3&) const = default;
};

/// One class of a label volume. The mask is stored cropped to its bounding
/// box; voxels outside the box are background.
struct LabelMask {
    std::string name;
    Box3 box;
    std::vector<std::uint8_t> data;

    bool at(std::size_t x, std::size_t y, std::size_t z) const;
    bool empty() const { return data.empty(); }
    std::size_t voxel_count() const;
    bool operator==(const LabelMask&) const = default;
};

/// Per-class binary masks sharing one grid. Classes may overlap.
class LabelVolume {
public:
    LabelVolume() = default;
    explicit LabelVolume(GridSpec grid) : grid_(std::move(grid)) {}

    const GridSpec& grid() const { return grid_; }
    const std::vector<LabelMask>& classes() const { return classes_; }
    std::vector<std::string> class_names() const;

    /// Adds a class from a full-grid mask; throws on duplicate name or dims mismatch.
    void add(const std::string& name, const Mask3D& mask);
    /// Adds an already-cropped class.
    void add(LabelMask mask);
    const LabelMask* find(const std::string& name) const;
    /// Expands a class back to a full-grid mask.
    Mask3D dense(const std::string& name) const;

    bool operator==(const LabelVolume&) const = default;

private:
    GridSpec grid_;
    std::vector<LabelMask> classes_;
};

} // namespace ctxr
