#pragma once

#include "ctxr/maskset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ctxr {

/// Exact pixel counts behind IoU and DICE.
struct Overlap {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint64_t intersection = 0;

    std::uint64_t union_size() const { return a + b - intersection; }
};

Overlap overlap(const Mask2D& a, const Mask2D& b);

struct IouDice {
    std::optional<double> iou;   // undefined when both masks are empty
    std::optional<double> dice;
};

IouDice iou_dice(const Mask2D& a, const Mask2D& b);

/// Foreground pixels with at least one background (or out-of-image) 4-neighbour.
std::vector<std::pair<std::size_t, std::size_t>> boundary_pixels(const Mask2D& mask);

/// Exact squared Euclidean distance from every pixel to the nearest set pixel.
/// Pixels of an empty mask get UINT64_MAX.
std::vector<std::uint64_t> squared_distance_transform(const Mask2D& mask);

/// Symmetric Hausdorff distance between the boundary sets; nullopt when either
/// mask is empty.
std::optional<double> hausdorff(const Mask2D& a, const Mask2D& b);

struct ClassScore {
    std::string name;
    std::optional<double> iou;
    std::optional<double> dice;
    std::optional<double> hausdorff;
};

struct SegScore {
    std::vector<ClassScore> classes;
    std::optional<double> mean_iou;
    std::optional<double> mean_dice;
    std::optional<double> mean_hausdorff;
    std::vector<std::string> undefined_overlap;    // empty in both sets
    std::vector<std::string> undefined_hausdorff;  // empty in at least one set
};

/// Per-class scores over the ground-truth classes. Throws
/// Error(taxonomy_mismatch) naming classes present in only one set.
SegScore evaluate_masksets(const MaskSet2D& pred, const MaskSet2D& gt);

std::string segscore_to_json(const SegScore& score);
std::string segscore_to_csv(const SegScore& score);

struct FeatureStats {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    Eigen::VectorXd mu_w;
    Eigen::MatrixXd sigma_w;

    /// Means and sample covariances of two feature matrices (one row per image).
    static FeatureStats from_features(const Eigen::MatrixXd& real, const Eigen::MatrixXd& projected);
    void validate() const;
};

/// |mu - mu_w|^2 + tr(Sigma + Sigma_w - 2 (Sigma Sigma_w)^{1/2}).
double frechet_distance(const FeatureStats& stats);

enum class TTestKind { welch, student };

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
};

/// Two-sample two-sided t-test of `pos` against `neg`.
TTestResult t_test(std::span<const double> pos, std::span<const double> neg, TTestKind kind = TTestKind::welch);

struct RocPoint {
    double threshold = 0.0;  // score >= threshold is called positive
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    std::vector<RocPoint> curve;  // starts at (0,0), ends at (1,1)
    double auc = 0.0;
};

/// ROC over the sorted unique scores. Tied scores form one step, so the
/// trapezoidal area equals the concordance probability with ties counted half.
/// Throws Error(undefined_metric) unless both labels occur.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

std::string roc_to_csv(const RocResult& roc);

struct CohortRow {
    std::string id;
    double value = 0.0;
    int label = 0;
    std::string sex;
    std::string age_group;
};

struct CohortTable {
    std::vector<CohortRow> rows;

    std::size_t n_pos() const;
    std::size_t n_neg() const;
    void validate() const;
};

} // namespace ctxr
