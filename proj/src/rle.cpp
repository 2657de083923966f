#include "ctxr/rle.hpp"

#include "ctxr/error.hpp"

#include <string>

namespace ctxr {

std::vector<std::uint32_t> rle_encode(std::span<const std::uint8_t> bits)
{
    std::vector<std::uint32_t> runs;
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (std::uint8_t b : bits) {
        const std::uint8_t v = b ? 1 : 0;
        if (v != current) {
            runs.push_back(run);
            run = 0;
            current = v;
        }
        ++run;
    }
    runs.push_back(run);
    return runs;
}

std::vector<std::uint8_t> rle_decode(std::span<const std::uint32_t> runs, std::size_t expected_size)
{
    std::vector<std::uint8_t> out;
    out.reserve(expected_size);
    std::uint8_t value = 0;
    for (std::uint32_t run : runs) {
        if (out.size() + run > expected_size)
            throw Error(ErrorCode::format, "run-length payload exceeds expected size " + std::to_string(expected_size));
        out.insert(out.end(), run, value);
        value ^= 1;
    }
    if (out.size() != expected_size)
        throw Error(ErrorCode::format, "run-length payload holds " + std::to_string(out.size()) +
                                           " elements, expected " + std::to_string(expected_size));
    return out;
}

} // namespace ctxr
