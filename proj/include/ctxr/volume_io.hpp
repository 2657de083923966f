#pragma once

#include "ctxr/volume.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>

namespace ctxr {

// Supported on-disk volume formats:
//   *.nii / *.nii.gz  NIfTI-1 single file, little-endian, datatypes uint8 (2),
//                     int16 (4), float32 (16); scl_slope/scl_inter applied.
//   *.json            native sidecar header next to a flat little-endian
//                     payload named by its "raw" field.
enum class VolumeFormat { nifti, nifti_gz, native };

VolumeFormat format_for_path(const std::filesystem::path& path);

Volume load_volume(const std::filesystem::path& path);
void save_volume(const Volume& volume, const std::filesystem::path& path);

// Label volumes are stored as `<name>.labels.json`: grid header plus per-class
// bounding boxes and run-length-encoded payloads.
LabelVolume load_labels(const std::filesystem::path& path);
void save_labels(const LabelVolume& labels, const std::filesystem::path& path);

/// `<dir>/<stem>.labels.json` for a volume path, the conventional location of
/// the labels belonging to it.
std::filesystem::path labels_path_for(const std::filesystem::path& volume_path);

/// Grid header as stored in native volume and label files.
nlohmann::json grid_to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);

/// File name without the volume extension (.json, .nii, .nii.gz).
std::string volume_stem(const std::filesystem::path& path);

} // namespace ctxr
