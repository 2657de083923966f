#pragma once

#include "ctxr/grid.hpp"
#include "ctxr/volume.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace ctxr {

enum class Compare { greater_equal, less_equal };

Mask3D threshold(const Volume& volume, double t, Compare sense);

/// Histogram over contiguous bins: bin k covers [edges[k], edges[k+1]).
struct Histogram {
    std::vector<double> edges;
    std::vector<std::uint64_t> counts;

    /// One bin per integer value in [lo, hi].
    static Histogram integer_bins(int lo, int hi);
    std::size_t bins() const { return counts.size(); }
    std::uint64_t total() const;
    void validate() const;
};

/// Prior strengths of the generalized histogram thresholding objective.
/// nu = +inf with tau = 0 is the limit in which the objective reduces to
/// minimizing the within-class sum of squares, i.e. Otsu's method.
struct GhtParams {
    double nu = std::numeric_limits<double>::infinity();
    double tau = 0.0;
    double kappa = 0.0;
    double omega = 0.5;

    static GhtParams otsu() { return {}; }
    bool is_otsu_limit() const;
    void validate() const;
};

/// Index k of the last bin assigned to the lower class (bins 0..k vs k+1..).
/// Ties resolve to the lowest k.
std::size_t ght_split(const Histogram& hist, const GhtParams& params);

/// The bin edge separating the two classes: edges[ght_split + 1]. Values
/// greater or equal to it belong to the upper class.
double ght_threshold(const Histogram& hist, const GhtParams& params);

enum class Connectivity { face, full };

/// Component labels: 0 is background, components are numbered 1..n in the
/// scan order of their first element.
struct Components {
    Dims3 dims;
    std::vector<std::int32_t> labels;
    std::vector<std::size_t> sizes;  // sizes[i] belongs to label i + 1
    std::vector<std::size_t> seeds;  // linear index of each component's first element

    std::size_t count() const { return sizes.size(); }
};

Components connected_components(const Mask3D& mask, Connectivity connectivity);
Components connected_components(const Mask2D& mask, Connectivity connectivity);

/// Keeps the largest component (full connectivity); ties keep the component
/// whose seed comes first in scan order.
Mask3D largest_component(const Mask3D& mask, Connectivity connectivity = Connectivity::full);
Mask2D largest_component(const Mask2D& mask, Connectivity connectivity = Connectivity::full);

/// Per slice normal to `axis` (0 = x, 1 = y, 2 = z), fills background not
/// 4-connected to the slice border.
Mask3D fill_holes_slicewise(const Mask3D& mask, int axis);
Mask2D fill_holes(const Mask2D& mask);

enum class MorphOp { erode, dilate, open, close };

/// Binary morphology with a discrete Euclidean ball of the given radius.
/// Out-of-grid neighbours count as background.
Mask3D morph(const Mask3D& mask, MorphOp op, int radius);
Mask2D morph(const Mask2D& mask, MorphOp op, int radius);

} // namespace ctxr
