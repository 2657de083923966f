#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ctxr {

// Binary run-length encoding: alternating run lengths in scan order, the
// first run counting zeros (possibly an empty run).
std::vector<std::uint32_t> rle_encode(std::span<const std::uint8_t> bits);

/// Throws Error(format) if the runs do not sum to `expected_size`.
std::vector<std::uint8_t> rle_decode(std::span<const std::uint32_t> runs, std::size_t expected_size);

} // namespace ctxr
