#pragma once

#include "ctxr/grid.hpp"
#include "ctxr/imgops.hpp"
#include "ctxr/maskset.hpp"
#include "ctxr/volume.hpp"

#include <optional>
#include <string>

namespace ctxr {

struct Size2 {
    std::size_t width = 512;
    std::size_t height = 512;
    bool operator==(const Size2&) const = default;
};

struct ProjectionConfig {
    double body_weight = 1.0;
    double bone_weight = 0.3;
    double body_threshold = -100.0;
    Size2 output_size{};
    bool equalize_frontal = true;
    bool equalize_lateral = false;
    std::size_t clahe_tiles_x = 8;
    std::size_t clahe_tiles_y = 8;
    double clahe_clip_limit = 4.0;
    HuWindow window{};
    GhtParams ght{};

    bool equalize(View view) const { return view == View::frontal ? equalize_frontal : equalize_lateral; }
    void validate() const;
};

/// Pseudo-radiograph of one view.
struct Projection {
    Gray8 image;
    View view = View::frontal;
    std::string source_id;
    bool equalized = false;
};

/// How a view maps grid axes onto image axes: columns, rows, and the ray
/// direction. Rows run superior to inferior; frontal columns run from the
/// patient's right to left, lateral columns from anterior to posterior.
struct ViewLayout {
    int column_axis = 0;
    int row_axis = 2;
    int ray_axis = 1;
    bool column_flipped = false;
    bool row_flipped = false;

    static ViewLayout of(const Orientation& orientation, View view);
    std::size_t width(const Dims3& d) const { return d[column_axis]; }
    std::size_t height(const Dims3& d) const { return d[row_axis]; }
};

/// Threshold at `threshold_hu` (inclusive), fill each axial slice, keep the
/// largest 3D component. Throws Error(degenerate_volume) when nothing remains.
Mask3D body_mask(const Volume& volume, double threshold_hu = -100.0);

/// Per axial slice, GHT threshold over the body voxel histogram (one bin per
/// integer HU of the window); bone voxels keep their HU, all others get
/// window.lo. Slices with fewer than two distinct values contribute no bone.
Volume bone_volume(const Volume& volume, const Mask3D& body, const GhtParams& ght, const HuWindow& window = {});

/// Mean of masked voxels along each ray; rays without masked voxels get `empty_value`.
ImageF project_mean(const Volume& volume, View view, const Mask3D& mask, double empty_value = HuWindow{}.lo);

/// Min-max rescale to [0, 255] with rounding; a constant image maps to 0.
Gray8 rescale_min_max(const ImageF& image);

/// Contrast-limited adaptive histogram equalization with bilinear blending of
/// per-tile mappings. clip_limit <= 0 or infinite disables clipping; a
/// constant image is returned unchanged.
Gray8 equalize_adaptive(const Gray8& image, std::size_t tiles_x, std::size_t tiles_y, double clip_limit);

/// Full pseudo-radiograph pipeline for one view.
Projection compose_drr(const Volume& volume, View view, const ProjectionConfig& config, std::string source_id = {});

/// Max-projects every class along the view's ray axis, then (optionally)
/// nearest-resizes to `output_size`.
MaskSet2D project_masks(const LabelVolume& labels, View view, std::optional<Size2> output_size = std::nullopt,
                        std::string source_id = {});

} // namespace ctxr
