#pragma once

#include "ctxr/grid.hpp"

#include <filesystem>

namespace ctxr {

/// 8-bit grayscale PNG. Output is byte-deterministic for a given image.
void write_png_gray8(const Gray8& image, const std::filesystem::path& path);
Gray8 read_png_gray8(const std::filesystem::path& path);

} // namespace ctxr
