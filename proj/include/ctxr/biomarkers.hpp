#pragma once

#include "ctxr/maskset.hpp"
#include "ctxr/taxonomy.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ctxr {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Mean foreground pixel coordinate (x = column, y = row). Throws
/// Error(empty_mask) for an empty mask.
Point2 centroid(const Mask2D& mask);

struct CtrMeasurement {
    double ratio = 0.0;
    std::size_t cardiac_width = 0;   // widest single-row heart extent, px
    std::size_t thoracic_width = 0;  // widest single-row lung-union extent, px
};

/// Cardio-thoracic ratio from `heart`, `lung_left`, `lung_right` on a frontal set.
CtrMeasurement measure_ctr(const MaskSet2D& masks);
double ctr(const MaskSet2D& masks);

/// Straight centreline: passes through `origin` along unit vector `direction`.
struct Centerline {
    Point2 origin;
    Point2 direction;

    double distance(const Point2& p) const;
};

/// least_absolute minimizes the sum of orthogonal distances (an optimal line
/// passes through two of the points; the first such pair in index order wins
/// ties). least_squares is the major axis of the scatter matrix.
enum class CenterlineFit { least_absolute, least_squares };

Centerline fit_centerline(std::span<const Point2> points, CenterlineFit fit = CenterlineFit::least_absolute);

/// Sum of orthogonal distances of the points to their fitted centreline.
double spine_center_distance(std::span<const Point2> centers, CenterlineFit fit = CenterlineFit::least_absolute);

struct ScdMeasurement {
    double scd = 0.0;
    std::size_t vertebra_count = 0;
    Centerline line;
    std::vector<Point2> centers;
};

/// Vertebra classes (vertebrae_C*, _T*, _L*) that are present and non-empty, in mask-set order.
std::vector<std::string> vertebra_classes(const MaskSet2D& masks);

ScdMeasurement measure_scd(const MaskSet2D& masks, CenterlineFit fit = CenterlineFit::least_absolute);
double scd(const MaskSet2D& masks);

struct BiomarkerRecord {
    std::string image_id;
    std::optional<double> ctr;
    std::optional<std::size_t> cardiac_width;
    std::optional<std::size_t> thoracic_width;
    std::string ctr_reason;  // empty when ctr is present
    std::optional<double> scd;
    std::optional<double> scd_normalized;
    std::optional<Centerline> centerline;
    std::size_t vertebra_count = 0;
    std::string scd_reason;
};

/// Computes whichever metrics the mask set supports; failures become null
/// values with the error code as reason.
BiomarkerRecord extract_biomarkers(const MaskSet2D& masks, std::string image_id = {});

std::string biomarker_csv_header();
std::string biomarker_csv_row(const BiomarkerRecord& record);

} // namespace ctxr
