#include "ctxr/resize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ctxr {

namespace {

constexpr double kLanczosRadius = 3.0;

double sinc(double x)
{
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

double lanczos(double x)
{
    if (x <= -kLanczosRadius || x >= kLanczosRadius) return 0.0;
    return sinc(x) * sinc(x / kLanczosRadius);
}

struct Tap {
    std::size_t first = 0;
    std::vector<double> weights;
};

// Per output sample: contiguous source taps with unit-sum weights.
std::vector<Tap> lanczos_taps(std::size_t in, std::size_t out)
{
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    const double filter_scale = std::max(1.0, scale);
    const double support = kLanczosRadius * filter_scale;
    std::vector<Tap> taps(out);
    for (std::size_t i = 0; i < out; ++i) {
        const double center = (static_cast<double>(i) + 0.5) * scale;
        const auto lo = static_cast<std::ptrdiff_t>(std::max(0.0, std::floor(center - support)));
        const auto hi = static_cast<std::ptrdiff_t>(std::min<double>(static_cast<double>(in), std::ceil(center + support)));
        Tap& t = taps[i];
        t.first = static_cast<std::size_t>(lo);
        double sum = 0.0;
        for (std::ptrdiff_t j = lo; j < hi; ++j) {
            const double w = lanczos((static_cast<double>(j) + 0.5 - center) / filter_scale);
            t.weights.push_back(w);
            sum += w;
        }
        if (sum != 0.0)
            for (double& w : t.weights) w /= sum;
    }
    return taps;
}

} // namespace

ImageF resize_2d(const ImageF& image, std::size_t width, std::size_t height, ResizeKernel kernel)
{
    if (width == 0 || height == 0)
        throw Error(ErrorCode::argument, "resize target dimensions must be positive");
    if (kernel == ResizeKernel::nearest) return resize_nearest(image, width, height);
    if (image.empty())
        throw Error(ErrorCode::argument, "cannot resize an empty image");

    const auto xtaps = lanczos_taps(image.width, width);
    const auto ytaps = lanczos_taps(image.height, height);

    ImageF horizontal(width, image.height);
    for (std::size_t y = 0; y < image.height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const Tap& t = xtaps[x];
            double acc = 0.0;
            for (std::size_t k = 0; k < t.weights.size(); ++k)
                acc += t.weights[k] * image.at(t.first + k, y);
            horizontal.at(x, y) = acc;
        }

    ImageF out(width, height);
    for (std::size_t y = 0; y < height; ++y) {
        const Tap& t = ytaps[y];
        for (std::size_t x = 0; x < width; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < t.weights.size(); ++k)
                acc += t.weights[k] * horizontal.at(x, t.first + k);
            out.at(x, y) = acc;
        }
    }
    return out;
}

} // namespace ctxr
