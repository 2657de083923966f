#pragma once

#include "ctxr/grid.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ctxr {

enum class View { frontal, lateral };

std::string to_string(View view);
View parse_view(const std::string& name);

struct MaskEntry {
    std::string name;
    Mask2D mask;
    bool derived = false;

    bool operator==(const MaskEntry&) const = default;
};

/// Named binary 2D masks aligned to one projection. Classes may overlap.
class MaskSet2D {
public:
    MaskSet2D() = default;
    MaskSet2D(View view, std::size_t width, std::size_t height, std::string source_id = {})
        : view_(view), width_(width), height_(height), source_id_(std::move(source_id)) {}

    View view() const { return view_; }
    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    const std::string& source_id() const { return source_id_; }
    void set_source_id(std::string id) { source_id_ = std::move(id); }

    const std::vector<MaskEntry>& entries() const { return entries_; }
    std::vector<std::string> class_names() const;
    bool contains(const std::string& name) const { return find(name) != nullptr; }
    const Mask2D* find(const std::string& name) const;

    /// The named mask; throws Error(missing_dependency) if absent or empty.
    const Mask2D& require(const std::string& name) const;
    /// The named mask if present and non-empty.
    const Mask2D* find_nonempty(const std::string& name) const;

    /// Replaces an existing class in place or appends a new one.
    void set(const std::string& name, Mask2D mask, bool derived = false);
    bool remove(const std::string& name);

    bool operator==(const MaskSet2D&) const = default;

private:
    View view_ = View::frontal;
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::string source_id_;
    std::vector<MaskEntry> entries_;
};

// Mask archive: one JSON document holding the index (view, dims, source,
// class order) and each class as a row-major run-length payload.
std::string encode_mask_archive(const MaskSet2D& masks);
MaskSet2D decode_mask_archive(const std::string& text);

MaskSet2D load_mask_archive(const std::filesystem::path& path);
void save_mask_archive(const MaskSet2D& masks, const std::filesystem::path& path);

/// Writes one 0/255 PNG per class into `dir` as `<prefix><class>.png`.
void export_mask_pngs(const MaskSet2D& masks, const std::filesystem::path& dir, const std::string& prefix);

} // namespace ctxr
