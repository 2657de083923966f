#pragma once

#include "ctxr/error.hpp"
#include "ctxr/grid.hpp"

namespace ctxr {

enum class ResizeKernel { lanczos, nearest };

/// Lanczos (a = 3, separable, rows renormalized to unit sum, support widened
/// by the scale factor when shrinking) or nearest-sample resize.
ImageF resize_2d(const ImageF& image, std::size_t width, std::size_t height, ResizeKernel kernel);

/// Source index sampled by nearest resize for output index `i`.
inline std::size_t nearest_source_index(std::size_t i, std::size_t in, std::size_t out)
{
    return ((2 * i + 1) * in) / (2 * out);
}

template <typename T>
Image2D<T> resize_nearest(const Image2D<T>& image, std::size_t width, std::size_t height)
{
    if (width == 0 || height == 0)
        throw Error(ErrorCode::argument, "resize target dimensions must be positive");
    if (image.empty())
        throw Error(ErrorCode::argument, "cannot resize an empty image");
    Image2D<T> out(width, height);
    for (std::size_t y = 0; y < height; ++y) {
        const std::size_t sy = nearest_source_index(y, image.height, height);
        for (std::size_t x = 0; x < width; ++x)
            out.at(x, y) = image.at(nearest_source_index(x, image.width, width), sy);
    }
    return out;
}

} // namespace ctxr
