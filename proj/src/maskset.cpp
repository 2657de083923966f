#include "ctxr/maskset.hpp"

#include "ctxr/error.hpp"
#include "ctxr/png_io.hpp"
#include "ctxr/rle.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace ctxr {

std::string to_string(View view)
{
    return view == View::frontal ? "frontal" : "lateral";
}

View parse_view(const std::string& name)
{
    if (name == "frontal") return View::frontal;
    if (name == "lateral") return View::lateral;
    throw Error(ErrorCode::argument, "unknown view '" + name + "' (expected frontal or lateral)");
}

std::vector<std::string> MaskSet2D::class_names() const
{
    std::vector<std::string> names;
    names.reserve(entries_.size());
    for (const auto& e : entries_) names.push_back(e.name);
    return names;
}

const Mask2D* MaskSet2D::find(const std::string& name) const
{
    for (const auto& e : entries_)
        if (e.name == name) return &e.mask;
    return nullptr;
}

const Mask2D* MaskSet2D::find_nonempty(const std::string& name) const
{
    const Mask2D* m = find(name);
    if (!m) return nullptr;
    return std::any_of(m->data.begin(), m->data.end(), [](auto v) { return v != 0; }) ? m : nullptr;
}

const Mask2D& MaskSet2D::require(const std::string& name) const
{
    const Mask2D* m = find_nonempty(name);
    if (!m) throw Error(ErrorCode::missing_dependency, "missing-dependency(\"" + name + "\")");
    return *m;
}

void MaskSet2D::set(const std::string& name, Mask2D mask, bool derived)
{
    if (mask.width != width_ || mask.height != height_)
        throw Error(ErrorCode::argument, "mask '" + name + "' dims do not match the mask set");
    for (auto& e : entries_)
        if (e.name == name) {
            e.mask = std::move(mask);
            e.derived = derived;
            return;
        }
    entries_.push_back(MaskEntry{name, std::move(mask), derived});
}

bool MaskSet2D::remove(const std::string& name)
{
    const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.name == name; });
    if (it == entries_.end()) return false;
    entries_.erase(it);
    return true;
}

std::string encode_mask_archive(const MaskSet2D& masks)
{
    json classes = json::array();
    for (const auto& e : masks.entries())
        classes.push_back(json{{"name", e.name}, {"derived", e.derived}, {"rle", rle_encode(e.mask.data)}});
    json j{{"format", "ctxr-mask-archive"},
           {"version", 1},
           {"view", to_string(masks.view())},
           {"width", masks.width()},
           {"height", masks.height()},
           {"source_id", masks.source_id()},
           {"classes", std::move(classes)}};
    return j.dump() + "\n";
}

MaskSet2D decode_mask_archive(const std::string& text)
{
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != "ctxr-mask-archive")
            throw Error(ErrorCode::format, "not a mask archive");
        const auto w = j.at("width").get<std::size_t>();
        const auto h = j.at("height").get<std::size_t>();
        MaskSet2D masks(parse_view(j.at("view").get<std::string>()), w, h, j.value("source_id", ""));
        for (const auto& c : j.at("classes")) {
            const auto name = c.at("name").get<std::string>();
            if (masks.contains(name)) throw Error(ErrorCode::format, "duplicate class '" + name + "' in mask archive");
            Mask2D m(w, h);
            m.data = rle_decode(c.at("rle").get<std::vector<std::uint32_t>>(), w * h);
            masks.set(name, std::move(m), c.value("derived", false));
        }
        return masks;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, std::string("malformed mask archive: ") + e.what());
    }
}

MaskSet2D load_mask_archive(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return decode_mask_archive(ss.str());
    } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " ('" + path.string() + "')");
    }
}

void save_mask_archive(const MaskSet2D& masks, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
    out << encode_mask_archive(masks);
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

void export_mask_pngs(const MaskSet2D& masks, const std::filesystem::path& dir, const std::string& prefix)
{
    std::filesystem::create_directories(dir);
    for (const auto& e : masks.entries()) {
        Gray8 img = e.mask;
        for (auto& v : img.data) v = v ? 255 : 0;
        write_png_gray8(img, dir / (prefix + e.name + ".png"));
    }
}

} // namespace ctxr
