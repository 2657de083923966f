#pragma once

#include "ctxr/maskset.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ctxr {

enum class ClavicleLandmark { inferior, superior };

struct RegionRuleConfig {
    int bifurcation_offset_rows = 10;
    std::array<double, 3> lung_zone_fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    ClavicleLandmark clavicle_landmark = ClavicleLandmark::inferior;
    bool split_aorta = true;

    bool mediastinum_t4 = true;
    bool mediastinum_ant_post = true;
    bool lung_zones = true;
    bool tracheal_bifurcation = true;
    bool hemidiaphragm = true;

    void validate() const;
};

namespace region_names {
inline constexpr const char* mediastinum = "mediastinum";
inline constexpr const char* vertebra_t4 = "vertebrae_T4";
inline constexpr const char* heart = "heart";
inline constexpr const char* trachea = "trachea";
inline constexpr const char* subdiaphragm = "subdiaphragm";
inline constexpr const char* aorta = "aorta";
inline constexpr const char* mediastinum_upper = "mediastinum_upper";
inline constexpr const char* mediastinum_lower = "mediastinum_lower";
inline constexpr const char* mediastinum_anterior = "mediastinum_anterior";
inline constexpr const char* mediastinum_posterior = "mediastinum_posterior";
inline constexpr const char* tracheal_bifurcation = "tracheal_bifurcation";
inline constexpr const char* subdiaphragm_right = "subdiaphragm_right";
inline constexpr const char* subdiaphragm_left = "subdiaphragm_left";
inline constexpr const char* aortic_arch = "aortic_arch";
inline constexpr const char* aorta_ascending = "aorta_ascending";
inline constexpr const char* aorta_descending = "aorta_descending";
} // namespace region_names

/// Adds mediastinum_upper (rows down to and including the last T4 row) and
/// mediastinum_lower (the rows below).
MaskSet2D split_mediastinum_t4(const MaskSet2D& masks);

/// Lateral view: splits mediastinum_lower per row at the heart's posterior
/// boundary column. Rows without heart pixels are posterior.
MaskSet2D split_mediastinum_ant_post(const MaskSet2D& masks);

struct LungZoneResult {
    MaskSet2D masks;
    std::vector<std::string> warnings;
};

/// Per side (lung_left / lung_right): upper/middle/lower zones by row thirds of
/// the lung's row range, plus an apical region bounded by the clavicle.
LungZoneResult lung_zones(const MaskSet2D& masks, const RegionRuleConfig& config = {});

/// First row of the persistent two-branch state of the trachea, if any.
std::optional<std::size_t> trachea_split_row(const Mask2D& trachea);

/// Trachea pixels from `offset` rows above the split row downward.
MaskSet2D tracheal_bifurcation(const MaskSet2D& masks, int offset_rows = 10);

/// Frontal view: splits the sub-diaphragm mask at its bounding-box centre
/// column. The image-left half is the patient's right.
MaskSet2D hemidiaphragm_split(const MaskSet2D& masks);

/// Frontal view: aortic arch = aorta rows down to the last T4 row; the rest
/// is split at the arch's centre column into ascending and descending parts.
MaskSet2D split_aorta(const MaskSet2D& masks);

struct RegionResult {
    MaskSet2D masks;
    std::vector<std::string> warnings;
};

/// Runs every enabled rule that applies to the view. Missing inputs become
/// warnings rather than errors. Previously derived classes are replaced.
RegionResult derive_regions(const MaskSet2D& masks, const RegionRuleConfig& config = {});

/// Lung zone class names for a side ("left"/"right").
std::string lung_zone_name(const std::string& side, const std::string& zone);

} // namespace ctxr
