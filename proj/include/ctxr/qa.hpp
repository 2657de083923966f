#pragma once

#include "ctxr/maskset.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctxr {

/// Cohort statistics of one class. Area is the fraction of the image; the
/// centroid is normalized by image width and height. Moments are sample
/// statistics over the images in which the class is non-empty and are only
/// reported when there are at least two of them.
struct ClassMoments {
    std::size_t present = 0;
    double presence = 0.0;  // present / cohort size
    std::optional<double> area_mean, area_std;
    std::optional<double> cx_mean, cx_std;
    std::optional<double> cy_mean, cy_std;
    std::optional<double> components_mean;
};

struct ClassStats {
    View view = View::frontal;
    std::size_t cohort_size = 0;
    std::map<std::string, ClassMoments> classes;
};

/// Throws Error(insufficient_cohort) for fewer than two mask sets and
/// Error(view_mismatch) for a mixed-view cohort.
ClassStats compute_class_stats(const std::vector<MaskSet2D>& cohort);

std::string class_stats_to_json(const ClassStats& stats);
ClassStats class_stats_from_json(const std::string& text);

struct QaConfig {
    double z_max = 3.0;
    int min_rib_pairs = 9;
    /// Class-level deviations also fail the image, not only hard rules.
    bool fail_on_class_deviation = false;

    void validate() const;
};

enum class Verdict { pass, warn, fail };
std::string to_string(Verdict v);

struct ClassCheck {
    std::string name;
    std::optional<double> z_area, z_cx, z_cy;  // absent when the class has no stats
    std::size_t components = 0;
    Verdict verdict = Verdict::pass;
    std::vector<std::string> reasons;  // "area-z", "centroid-z", "components"
};

struct PlausibilityReport {
    std::string image_id;
    std::vector<ClassCheck> classes;
    std::size_t rib_pairs = 0;
    Verdict verdict = Verdict::pass;
    /// Failed hard rules ("rib_count") followed by the distinct class-level reasons.
    std::vector<std::string> reasons;
    std::vector<std::string> failed_rules;
};

PlausibilityReport plausibility_check(const MaskSet2D& masks, const ClassStats& stats, const QaConfig& config = {});

/// Distinct non-empty posterior ribs per side; the pair count is their minimum.
std::size_t count_rib_pairs(const MaskSet2D& masks);

std::string report_to_json(const PlausibilityReport& report);
std::string report_csv_header();
std::string report_csv_row(const PlausibilityReport& report);

} // namespace ctxr
