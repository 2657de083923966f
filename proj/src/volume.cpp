#include "ctxr/volume.hpp"

#include "ctxr/error.hpp"

#include <algorithm>
#include <cmath>

namespace ctxr {

std::string to_string(ScalarType type)
{
    switch (type) {
    case ScalarType::uint8: return "uint8";
    case ScalarType::int16: return "int16";
    case ScalarType::float32: return "float32";
    }
    return "?";
}

ScalarType parse_scalar_type(const std::string& name)
{
    if (name == "uint8") return ScalarType::uint8;
    if (name == "int16") return ScalarType::int16;
    if (name == "float32") return ScalarType::float32;
    throw Error(ErrorCode::unsupported_datatype,
                "unsupported datatype '" + name + "' (supported: uint8, int16, float32)");
}

void HuWindow::validate() const
{
    if (!(lo < hi))
        throw Error(ErrorCode::argument, "HU window requires lo < hi");
}

Volume::Volume(GridSpec g, float fill) : grid(std::move(g)), data(grid.dims.count(), fill) {}

void Volume::validate() const
{
    grid.validate();
    if (data.size() != grid.dims.count())
        throw Error(ErrorCode::argument, "volume payload has " + std::to_string(data.size()) +
                                             " voxels, dims require " + std::to_string(grid.dims.count()));
}

Volume clip_hu(const Volume& volume, double lo, double hi)
{
    if (!(lo < hi))
        throw Error(ErrorCode::argument, "clip_hu requires lo < hi");
    Volume out = volume;
    const float flo = static_cast<float>(lo);
    const float fhi = static_cast<float>(hi);
    for (float& v : out.data)
        v = std::clamp(v, flo, fhi);
    return out;
}

bool LabelMask::at(std::size_t x, std::size_t y, std::size_t z) const
{
    if (!box.contains(x, y, z)) return false;
    return data[((z - box.z0) * box.dims.ny + (y - box.y0)) * box.dims.nx + (x - box.x0)] != 0;
}

std::size_t LabelMask::voxel_count() const
{
    return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](auto v) { return v != 0; }));
}

std::vector<std::string> LabelVolume::class_names() const
{
    std::vector<std::string> names;
    names.reserve(classes_.size());
    for (const auto& c : classes_) names.push_back(c.name);
    return names;
}

void LabelVolume::add(const std::string& name, const Mask3D& mask)
{
    if (mask.dims != grid_.dims)
        throw Error(ErrorCode::argument, "label '" + name + "' dims do not match the label grid");
    const Dims3 d = mask.dims;
    std::size_t x0 = d.nx, y0 = d.ny, z0 = d.nz, x1 = 0, y1 = 0, z1 = 0;
    bool any = false;
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x)
                if (mask.at(x, y, z)) {
                    any = true;
                    x0 = std::min(x0, x); x1 = std::max(x1, x);
                    y0 = std::min(y0, y); y1 = std::max(y1, y);
                    z0 = std::min(z0, z); z1 = std::max(z1, z);
                }
    LabelMask lm;
    lm.name = name;
    if (any) {
        lm.box = Box3{x0, y0, z0, Dims3{x1 - x0 + 1, y1 - y0 + 1, z1 - z0 + 1}};
        lm.data.resize(lm.box.dims.count());
        std::size_t i = 0;
        for (std::size_t z = z0; z <= z1; ++z)
            for (std::size_t y = y0; y <= y1; ++y)
                for (std::size_t x = x0; x <= x1; ++x)
                    lm.data[i++] = mask.at(x, y, z) ? 1 : 0;
    }
    add(std::move(lm));
}

void LabelVolume::add(LabelMask mask)
{
    if (find(mask.name))
        throw Error(ErrorCode::argument, "duplicate label class '" + mask.name + "'");
    if (!mask.data.empty()) {
        const Box3& b = mask.box;
        if (b.x0 + b.dims.nx > grid_.dims.nx || b.y0 + b.dims.ny > grid_.dims.ny ||
            b.z0 + b.dims.nz > grid_.dims.nz || mask.data.size() != b.dims.count())
            throw Error(ErrorCode::argument, "label '" + mask.name + "' box exceeds the label grid");
    }
    classes_.push_back(std::move(mask));
}

const LabelMask* LabelVolume::find(const std::string& name) const
{
    for (const auto& c : classes_)
        if (c.name == name) return &c;
    return nullptr;
}

Mask3D LabelVolume::dense(const std::string& name) const
{
    const LabelMask* lm = find(name);
    if (!lm) throw Error(ErrorCode::missing_dependency, "missing label class '" + name + "'");
    Mask3D out(grid_.dims);
    const Box3& b = lm->box;
    std::size_t i = 0;
    for (std::size_t z = 0; z < b.dims.nz && !lm->data.empty(); ++z)
        for (std::size_t y = 0; y < b.dims.ny; ++y)
            for (std::size_t x = 0; x < b.dims.nx; ++x)
                out.at(b.x0 + x, b.y0 + y, b.z0 + z) = lm->data[i++];
    return out;
}

} // namespace ctxr
