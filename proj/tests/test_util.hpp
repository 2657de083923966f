#pragma once

#include "ctxr/grid.hpp"
#include "ctxr/maskset.hpp"
#include "ctxr/volume.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace ctxr::test {

inline std::mt19937_64& rng()
{
    static std::mt19937_64 r(12345);
    return r;
}

inline int uniform_int(std::mt19937_64& g, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(g);
}

inline double uniform_real(std::mt19937_64& g, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline Mask2D random_mask2d(std::mt19937_64& g, std::size_t w, std::size_t h, double p)
{
    Mask2D m(w, h);
    std::bernoulli_distribution b(p);
    for (auto& v : m.data) v = b(g) ? 1 : 0;
    return m;
}

inline Mask3D random_mask3d(std::mt19937_64& g, Dims3 d, double p)
{
    Mask3D m(d);
    std::bernoulli_distribution b(p);
    for (auto& v : m.data) v = b(g) ? 1 : 0;
    return m;
}

/// Union of random axis-aligned rectangles and discs.
inline Mask2D random_blobs(std::mt19937_64& g, std::size_t w, std::size_t h, int count)
{
    Mask2D m(w, h);
    for (int k = 0; k < count; ++k) {
        const int cx = uniform_int(g, 0, static_cast<int>(w) - 1);
        const int cy = uniform_int(g, 0, static_cast<int>(h) - 1);
        const int r = uniform_int(g, 1, static_cast<int>(std::min(w, h) / 4));
        const bool disc = uniform_int(g, 0, 1) == 1;
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const int dx = static_cast<int>(x) - cx, dy = static_cast<int>(y) - cy;
                if (disc ? dx * dx + dy * dy <= r * r : std::abs(dx) <= r && std::abs(dy) <= r / 2 + 1) m.at(x, y) = 1;
            }
    }
    return m;
}

inline Volume random_volume(std::mt19937_64& g, Dims3 d, int lo, int hi)
{
    GridSpec grid;
    grid.dims = d;
    Volume v(grid);
    for (auto& x : v.data) x = static_cast<float>(uniform_int(g, lo, hi));
    return v;
}

/// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("ctxr_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace ctxr::test
