#include "ctxr/grid.hpp"

#include "ctxr/error.hpp"

#include <algorithm>
#include <cmath>

namespace ctxr {

std::string to_string(AxisRole role)
{
    switch (role) {
    case AxisRole::sagittal: return "sagittal";
    case AxisRole::coronal: return "coronal";
    case AxisRole::axial: return "axial";
    }
    return "?";
}

AxisRole parse_axis_role(const std::string& name)
{
    if (name == "sagittal") return AxisRole::sagittal;
    if (name == "coronal") return AxisRole::coronal;
    if (name == "axial") return AxisRole::axial;
    throw Error(ErrorCode::format, "unknown axis role '" + name + "'");
}

int Orientation::axis_of(AxisRole role) const
{
    for (int i = 0; i < 3; ++i)
        if (roles[i] == role) return i;
    throw Error(ErrorCode::argument, "orientation has no " + to_string(role) + " axis");
}

void Orientation::validate() const
{
    for (AxisRole r : {AxisRole::sagittal, AxisRole::coronal, AxisRole::axial})
        if (std::count(roles.begin(), roles.end(), r) != 1)
            throw Error(ErrorCode::argument, "orientation must name each axis role exactly once");
}

void GridSpec::validate() const
{
    if (dims.count() == 0)
        throw Error(ErrorCode::argument, "grid dimensions must be positive");
    for (int a = 0; a < 3; ++a)
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
            throw Error(ErrorCode::argument, "grid spacing must be strictly positive");
    orientation.validate();
}

std::size_t count_foreground(const Mask2D& mask)
{
    return static_cast<std::size_t>(std::count_if(mask.data.begin(), mask.data.end(), [](auto v) { return v != 0; }));
}

std::size_t count_foreground(const Mask3D& mask)
{
    return static_cast<std::size_t>(std::count_if(mask.data.begin(), mask.data.end(), [](auto v) { return v != 0; }));
}

} // namespace ctxr
