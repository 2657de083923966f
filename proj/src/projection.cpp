#include "ctxr/projection.hpp"

#include "ctxr/error.hpp"
#include "ctxr/resize.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ctxr {

void ProjectionConfig::validate() const
{
    if (!(body_weight >= 0.0) || !(bone_weight >= 0.0))
        throw Error(ErrorCode::argument, "projection weights must be non-negative");
    if (output_size.width == 0 || output_size.height == 0)
        throw Error(ErrorCode::argument, "projection output size must be positive");
    if (clahe_tiles_x == 0 || clahe_tiles_y == 0)
        throw Error(ErrorCode::argument, "CLAHE needs at least one tile per axis");
    window.validate();
    ght.validate();
}

ViewLayout ViewLayout::of(const Orientation& orientation, View view)
{
    ViewLayout l;
    const int sagittal = orientation.axis_of(AxisRole::sagittal);
    const int coronal = orientation.axis_of(AxisRole::coronal);
    l.row_axis = orientation.axis_of(AxisRole::axial);
    l.column_axis = view == View::frontal ? sagittal : coronal;
    l.ray_axis = view == View::frontal ? coronal : sagittal;
    l.column_flipped = orientation.flipped[static_cast<std::size_t>(l.column_axis)];
    l.row_flipped = orientation.flipped[static_cast<std::size_t>(l.row_axis)];
    return l;
}

namespace {

// Image column/row index for every grid coordinate along the column and row axes.
struct PixelMap {
    ViewLayout layout;
    std::array<std::vector<std::size_t>, 3> coord_to_pixel; // per grid axis, unused for the ray axis
    std::size_t width = 0;
    std::size_t height = 0;

    PixelMap(const GridSpec& grid, View view) : layout(ViewLayout::of(grid.orientation, view))
    {
        width = layout.width(grid.dims);
        height = layout.height(grid.dims);
        auto fill = [&](int axis, bool flipped) {
            auto& m = coord_to_pixel[static_cast<std::size_t>(axis)];
            const std::size_t n = grid.dims[axis];
            m.resize(n);
            for (std::size_t i = 0; i < n; ++i) m[i] = flipped ? n - 1 - i : i;
        };
        fill(layout.column_axis, layout.column_flipped);
        fill(layout.row_axis, layout.row_flipped);
    }

    std::size_t pixel(std::size_t x, std::size_t y, std::size_t z) const
    {
        const std::array<std::size_t, 3> c{x, y, z};
        const auto ca = static_cast<std::size_t>(layout.column_axis);
        const auto ra = static_cast<std::size_t>(layout.row_axis);
        return coord_to_pixel[ra][c[ra]] * width + coord_to_pixel[ca][c[ca]];
    }
};

int axial_axis(const GridSpec& grid) { return grid.orientation.axis_of(AxisRole::axial); }

} // namespace

Mask3D body_mask(const Volume& volume, double threshold_hu)
{
    Mask3D mask = threshold(volume, threshold_hu, Compare::greater_equal);
    mask = fill_holes_slicewise(mask, axial_axis(volume.grid));
    mask = largest_component(mask, Connectivity::face);
    if (count_foreground(mask) == 0)
        throw Error(ErrorCode::degenerate_volume, "no voxel reaches the body threshold of " +
                                                      std::to_string(threshold_hu) + " HU");
    return mask;
}

Volume bone_volume(const Volume& volume, const Mask3D& body, const GhtParams& ght, const HuWindow& window)
{
    window.validate();
    if (body.dims != volume.dims())
        throw Error(ErrorCode::argument, "body mask is not aligned with the volume");
    const Dims3 d = volume.dims();
    const int axis = axial_axis(volume.grid);
    const std::size_t slices = d[axis];
    const int lo = static_cast<int>(std::floor(window.lo));
    const int hi = static_cast<int>(std::floor(window.hi));

    auto bin_of = [&](float v) {
        const int b = static_cast<int>(std::floor(v)) - lo;
        return static_cast<std::size_t>(std::clamp(b, 0, hi - lo));
    };

    std::vector<Histogram> hists(slices, Histogram::integer_bins(lo, hi));
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                const std::size_t i = volume.grid.index(x, y, z);
                if (!body.data[i]) continue;
                const std::array<std::size_t, 3> c{x, y, z};
                ++hists[c[static_cast<std::size_t>(axis)]].counts[bin_of(volume.data[i])];
            }

    // Threshold per slice; slices with < 2 occupied bins get +inf (no bone).
    std::vector<double> cut(slices, std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < slices; ++s) {
        const auto& counts = hists[s].counts;
        const auto occupied = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
        if (occupied >= 2) cut[s] = ght_threshold(hists[s], ght);
    }

    Volume out(volume.grid, static_cast<float>(window.lo));
    out.stored_as = volume.stored_as;
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                const std::size_t i = volume.grid.index(x, y, z);
                const std::array<std::size_t, 3> c{x, y, z};
                if (body.data[i] && volume.data[i] >= cut[c[static_cast<std::size_t>(axis)]])
                    out.data[i] = volume.data[i];
            }
    return out;
}

ImageF project_mean(const Volume& volume, View view, const Mask3D& mask, double empty_value)
{
    if (mask.dims != volume.dims())
        throw Error(ErrorCode::argument, "projection mask is not aligned with the volume");
    const PixelMap map(volume.grid, view);
    std::vector<double> sum(map.width * map.height, 0.0);
    std::vector<std::size_t> count(sum.size(), 0);
    const Dims3 d = volume.dims();
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                const std::size_t i = volume.grid.index(x, y, z);
                if (!mask.data[i]) continue;
                const std::size_t p = map.pixel(x, y, z);
                sum[p] += volume.data[i];
                ++count[p];
            }
    ImageF out(map.width, map.height);
    for (std::size_t p = 0; p < sum.size(); ++p)
        out.data[p] = count[p] ? sum[p] / static_cast<double>(count[p]) : empty_value;
    return out;
}

Gray8 rescale_min_max(const ImageF& image)
{
    Gray8 out(image.width, image.height, 0);
    if (image.empty()) return out;
    const auto [mn, mx] = std::minmax_element(image.data.begin(), image.data.end());
    const double lo = *mn, range = *mx - *mn;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < image.data.size(); ++i)
        out.data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(255.0 * (image.data[i] - lo) / range, 0.0, 255.0)));
    return out;
}

namespace {

struct TileAxis {
    std::vector<std::size_t> start;  // tiles + 1 boundaries
    std::vector<double> center;

    TileAxis(std::size_t n, std::size_t tiles)
    {
        for (std::size_t i = 0; i <= tiles; ++i) start.push_back(i * n / tiles);
        for (std::size_t i = 0; i < tiles; ++i)
            center.push_back(0.5 * static_cast<double>(start[i] + start[i + 1] - 1));
    }

    // Lower tile index and weight of the upper neighbour for coordinate p.
    std::pair<std::size_t, double> locate(std::size_t p) const
    {
        const double pos = static_cast<double>(p);
        if (center.size() == 1 || pos <= center.front()) return {0, 0.0};
        if (pos >= center.back()) return {center.size() - 1, 0.0};
        std::size_t i = 0;
        while (i + 2 < center.size() && pos >= center[i + 1]) ++i;
        return {i, (pos - center[i]) / (center[i + 1] - center[i])};
    }
};

} // namespace

Gray8 equalize_adaptive(const Gray8& image, std::size_t tiles_x, std::size_t tiles_y, double clip_limit)
{
    if (tiles_x == 0 || tiles_y == 0) throw Error(ErrorCode::argument, "CLAHE needs at least one tile per axis");
    if (image.empty()) return image;
    const auto [mn, mx] = std::minmax_element(image.data.begin(), image.data.end());
    if (*mn == *mx) return image;
    tiles_x = std::min(tiles_x, image.width);
    tiles_y = std::min(tiles_y, image.height);

    const TileAxis ax(image.width, tiles_x), ay(image.height, tiles_y);
    const bool clip = clip_limit > 0.0 && std::isfinite(clip_limit);
    std::vector<std::array<double, 256>> luts(tiles_x * tiles_y);
    for (std::size_t ty = 0; ty < tiles_y; ++ty)
        for (std::size_t tx = 0; tx < tiles_x; ++tx) {
            std::array<double, 256> hist{};
            for (std::size_t y = ay.start[ty]; y < ay.start[ty + 1]; ++y)
                for (std::size_t x = ax.start[tx]; x < ax.start[tx + 1]; ++x) hist[image.at(x, y)] += 1.0;
            const double area = static_cast<double>((ax.start[tx + 1] - ax.start[tx]) * (ay.start[ty + 1] - ay.start[ty]));
            if (clip) {
                const double limit = std::max(1.0, clip_limit * area / 256.0);
                double excess = 0.0;
                for (double& h : hist)
                    if (h > limit) {
                        excess += h - limit;
                        h = limit;
                    }
                for (double& h : hist) h += excess / 256.0;
            }
            auto& lut = luts[ty * tiles_x + tx];
            double cdf = 0.0;
            for (std::size_t v = 0; v < 256; ++v) {
                cdf += hist[v];
                lut[v] = 255.0 * cdf / area;
            }
        }

    Gray8 out(image.width, image.height);
    for (std::size_t y = 0; y < image.height; ++y) {
        const auto [ty, wy] = ay.locate(y);
        const std::size_t ty1 = std::min(ty + 1, tiles_y - 1);
        for (std::size_t x = 0; x < image.width; ++x) {
            const auto [tx, wx] = ax.locate(x);
            const std::size_t tx1 = std::min(tx + 1, tiles_x - 1);
            const std::uint8_t v = image.at(x, y);
            const double top = (1.0 - wx) * luts[ty * tiles_x + tx][v] + wx * luts[ty * tiles_x + tx1][v];
            const double bottom = (1.0 - wx) * luts[ty1 * tiles_x + tx][v] + wx * luts[ty1 * tiles_x + tx1][v];
            const double value = (1.0 - wy) * top + wy * bottom;
            out.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(value, 0.0, 255.0)));
        }
    }
    return out;
}

Projection compose_drr(const Volume& volume, View view, const ProjectionConfig& config, std::string source_id)
{
    config.validate();
    volume.validate();
    const Volume clipped = clip_hu(volume, config.window);
    const Mask3D body = body_mask(clipped, config.body_threshold);
    const Volume bone = bone_volume(clipped, body, config.ght, config.window);

    // Both terms are offset by the window minimum so that air (and "no bone")
    // is the additive zero of the weighted sum.
    const double lo = config.window.lo;
    Volume weighted(clipped.grid, 0.0f);
    for (std::size_t i = 0; i < weighted.data.size(); ++i)
        weighted.data[i] = static_cast<float>(config.body_weight * (clipped.data[i] - lo) +
                                              config.bone_weight * (bone.data[i] - lo));

    const ImageF mean = project_mean(weighted, view, body, 0.0);
    Gray8 img = rescale_min_max(mean);
    const bool equalize = config.equalize(view);
    if (equalize) img = equalize_adaptive(img, config.clahe_tiles_x, config.clahe_tiles_y, config.clahe_clip_limit);

    ImageF as_real(img.width, img.height);
    std::copy(img.data.begin(), img.data.end(), as_real.data.begin());
    const ImageF resized = resize_2d(as_real, config.output_size.width, config.output_size.height, ResizeKernel::lanczos);

    Projection p;
    p.view = view;
    p.source_id = std::move(source_id);
    p.equalized = equalize;
    p.image = Gray8(resized.width, resized.height);
    for (std::size_t i = 0; i < resized.data.size(); ++i)
        p.image.data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(resized.data[i], 0.0, 255.0)));
    return p;
}

MaskSet2D project_masks(const LabelVolume& labels, View view, std::optional<Size2> output_size, std::string source_id)
{
    const PixelMap map(labels.grid(), view);
    const Size2 size = output_size.value_or(Size2{map.width, map.height});
    if (size.width == 0 || size.height == 0)
        throw Error(ErrorCode::argument, "mask projection output size must be positive");
    MaskSet2D out(view, size.width, size.height, std::move(source_id));
    for (const auto& cls : labels.classes()) {
        Mask2D m(map.width, map.height);
        const Box3& b = cls.box;
        std::size_t i = 0;
        for (std::size_t z = 0; z < b.dims.nz && !cls.data.empty(); ++z)
            for (std::size_t y = 0; y < b.dims.ny; ++y)
                for (std::size_t x = 0; x < b.dims.nx; ++x, ++i)
                    if (cls.data[i]) m.data[map.pixel(b.x0 + x, b.y0 + y, b.z0 + z)] = 1;
        if (m.width != size.width || m.height != size.height) m = resize_nearest(m, size.width, size.height);
        out.set(cls.name, std::move(m));
    }
    return out;
}

} // namespace ctxr
