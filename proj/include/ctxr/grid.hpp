#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ctxr {

struct Dims3 {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::size_t nz = 0;

    std::size_t count() const { return nx * ny * nz; }
    std::size_t operator[](int axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }
    bool operator==(const Dims3&) const = default;
};

struct Spacing3 {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;

    double operator[](int axis) const { return axis == 0 ? sx : axis == 1 ? sy : sz; }
    bool operator==(const Spacing3&) const = default;
};

// Anatomical role of an array axis. Canonical index directions:
// sagittal axis increases toward the patient's left, coronal toward
// posterior, axial toward inferior. `flipped` marks an axis whose index
// runs the opposite way.
enum class AxisRole : std::uint8_t { sagittal, coronal, axial };

std::string to_string(AxisRole role);
AxisRole parse_axis_role(const std::string& name);

struct Orientation {
    std::array<AxisRole, 3> roles{AxisRole::sagittal, AxisRole::coronal, AxisRole::axial};
    std::array<bool, 3> flipped{false, false, false};

    /// Array axis carrying the given role.
    int axis_of(AxisRole role) const;
    void validate() const;
    bool operator==(const Orientation&) const = default;
};

struct GridSpec {
    Dims3 dims;
    Spacing3 spacing;
    Orientation orientation;

    void validate() const;
    std::size_t index(std::size_t x, std::size_t y, std::size_t z) const
    {
        return (z * dims.ny + y) * dims.nx + x;
    }
    bool operator==(const GridSpec&) const = default;
};

/// Dense row-major 2D array; (x, y) = (column, row), row 0 at the top.
template <typename T>
struct Image2D {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<T> data;

    Image2D() = default;
    Image2D(std::size_t w, std::size_t h, T fill = T{}) : width(w), height(h), data(w * h, fill) {}

    T& at(std::size_t x, std::size_t y) { return data[y * width + x]; }
    const T& at(std::size_t x, std::size_t y) const { return data[y * width + x]; }
    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool operator==(const Image2D&) const = default;
};

using Mask2D = Image2D<std::uint8_t>;
using Gray8 = Image2D<std::uint8_t>;
using ImageF = Image2D<double>;

/// Dense 3D array in x-fastest order.
template <typename T>
struct Grid3 {
    Dims3 dims;
    std::vector<T> data;

    Grid3() = default;
    explicit Grid3(Dims3 d, T fill = T{}) : dims(d), data(d.count(), fill) {}

    std::size_t index(std::size_t x, std::size_t y, std::size_t z) const
    {
        return (z * dims.ny + y) * dims.nx + x;
    }
    T& at(std::size_t x, std::size_t y, std::size_t z) { return data[index(x, y, z)]; }
    const T& at(std::size_t x, std::size_t y, std::size_t z) const { return data[index(x, y, z)]; }
    bool operator==(const Grid3&) const = default;
};

using Mask3D = Grid3<std::uint8_t>;

std::size_t count_foreground(const Mask2D& mask);
std::size_t count_foreground(const Mask3D& mask);

} // namespace ctxr
