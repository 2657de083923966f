#include "ctxr/biomarkers.hpp"

#include "ctxr/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace ctxr {

Point2 centroid(const Mask2D& mask)
{
    double sx = 0.0;
    double sy = 0.0;
    std::size_t n = 0;
    for (std::size_t y = 0; y < mask.height; ++y)
        for (std::size_t x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                sx += static_cast<double>(x);
                sy += static_cast<double>(y);
                ++n;
            }
    if (n == 0) throw Error(ErrorCode::empty_mask, "centroid of an empty mask");
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

namespace {

std::size_t widest_row_extent(const Mask2D& a, const Mask2D* b)
{
    std::size_t best = 0;
    for (std::size_t y = 0; y < a.height; ++y) {
        std::size_t left = a.width;
        std::size_t right = 0;
        for (std::size_t x = 0; x < a.width; ++x)
            if (a.at(x, y) || (b && b->at(x, y))) {
                left = std::min(left, x);
                right = x;
            }
        if (left <= right && left < a.width) best = std::max(best, right - left + 1);
    }
    return best;
}

} // namespace

CtrMeasurement measure_ctr(const MaskSet2D& masks)
{
    if (masks.view() != View::frontal)
        throw Error(ErrorCode::view_mismatch, "ctr requires a frontal mask set");
    const Mask2D& heart = masks.require("heart");
    const Mask2D& left = masks.require("lung_left");
    const Mask2D& right = masks.require("lung_right");
    CtrMeasurement m;
    m.cardiac_width = widest_row_extent(heart, nullptr);
    m.thoracic_width = widest_row_extent(left, &right);
    if (m.thoracic_width == 0) throw Error(ErrorCode::degenerate_geometry, "zero thoracic width");
    m.ratio = static_cast<double>(m.cardiac_width) / static_cast<double>(m.thoracic_width);
    return m;
}

double ctr(const MaskSet2D& masks)
{
    return measure_ctr(masks).ratio;
}

double Centerline::distance(const Point2& p) const
{
    return std::abs((p.x - origin.x) * direction.y - (p.y - origin.y) * direction.x);
}

namespace {

Centerline fit_least_squares(std::span<const Point2> points)
{
    const double n = static_cast<double>(points.size());
    Point2 mean;
    for (const auto& p : points) {
        mean.x += p.x;
        mean.y += p.y;
    }
    mean.x /= n;
    mean.y /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (const auto& p : points) {
        const double dx = p.x - mean.x;
        const double dy = p.y - mean.y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // Major axis of the scatter matrix; all-coincident points give the x axis.
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    return Centerline{mean, {std::cos(theta), std::sin(theta)}};
}

double distance_sum(const Centerline& line, std::span<const Point2> points)
{
    double sum = 0.0;
    for (const auto& p : points) sum += line.distance(p);
    return sum;
}

Centerline fit_least_absolute(std::span<const Point2> points)
{
    std::optional<Centerline> best;
    double best_sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double dx = points[j].x - points[i].x, dy = points[j].y - points[i].y;
            const double len = std::hypot(dx, dy);
            if (len == 0.0) continue;
            const Centerline line{points[i], {dx / len, dy / len}};
            const double sum = distance_sum(line, points);
            if (!best || sum < best_sum) {
                best = line;
                best_sum = sum;
            }
        }
    // All points coincide: any line through them is optimal.
    return best ? *best : fit_least_squares(points);
}

} // namespace

Centerline fit_centerline(std::span<const Point2> points, CenterlineFit fit)
{
    if (points.size() < 2) throw Error(ErrorCode::insufficient_landmarks, "centreline needs at least 2 points");
    return fit == CenterlineFit::least_absolute ? fit_least_absolute(points) : fit_least_squares(points);
}

double spine_center_distance(std::span<const Point2> centers, CenterlineFit fit)
{
    return distance_sum(fit_centerline(centers, fit), centers);
}

std::vector<std::string> vertebra_classes(const MaskSet2D& masks)
{
    std::vector<std::string> names;
    for (const auto& e : masks.entries())
        if (is_vertebra_class(e.name) && masks.find_nonempty(e.name)) names.push_back(e.name);
    return names;
}

ScdMeasurement measure_scd(const MaskSet2D& masks, CenterlineFit fit)
{
    ScdMeasurement m;
    for (const auto& name : vertebra_classes(masks)) m.centers.push_back(centroid(*masks.find(name)));
    m.vertebra_count = m.centers.size();
    if (m.vertebra_count < 2)
        throw Error(ErrorCode::insufficient_landmarks,
                    "scd needs at least 2 vertebrae, found " + std::to_string(m.vertebra_count));
    m.line = fit_centerline(m.centers, fit);
    for (const auto& p : m.centers) m.scd += m.line.distance(p);
    return m;
}

double scd(const MaskSet2D& masks)
{
    return measure_scd(masks).scd;
}

BiomarkerRecord extract_biomarkers(const MaskSet2D& masks, std::string image_id)
{
    BiomarkerRecord r;
    r.image_id = image_id.empty() ? masks.source_id() : std::move(image_id);
    if (masks.view() != View::frontal) {
        r.ctr_reason = r.scd_reason = to_string(ErrorCode::view_mismatch);
        return r;
    }
    try {
        const CtrMeasurement m = measure_ctr(masks);
        r.ctr = m.ratio;
        r.cardiac_width = m.cardiac_width;
        r.thoracic_width = m.thoracic_width;
    } catch (const Error& e) {
        r.ctr_reason = to_string(e.code());
    }
    try {
        const ScdMeasurement m = measure_scd(masks);
        r.scd = m.scd;
        r.scd_normalized = masks.height() ? m.scd / static_cast<double>(masks.height()) : 0.0;
        r.centerline = m.line;
        r.vertebra_count = m.vertebra_count;
    } catch (const Error& e) {
        r.scd_reason = to_string(e.code());
        r.vertebra_count = vertebra_classes(masks).size();
    }
    return r;
}

namespace {

std::string fmt_real(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
std::string opt_field(const std::optional<T>& v)
{
    if (!v) return {};
    if constexpr (std::is_floating_point_v<T>)
        return fmt_real(*v);
    else
        return std::to_string(*v);
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string biomarker_csv_header()
{
    return "id,ctr,scd,scd_normalized,cardiac_width,thoracic_width,vertebra_count,ctr_reason,scd_reason";
}

std::string biomarker_csv_row(const BiomarkerRecord& r)
{
    return csv_escape(r.image_id) + "," + opt_field(r.ctr) + "," + opt_field(r.scd) + "," +
           opt_field(r.scd_normalized) + "," + opt_field(r.cardiac_width) + "," + opt_field(r.thoracic_width) + "," +
           std::to_string(r.vertebra_count) + "," + r.ctr_reason + "," + r.scd_reason;
}

} // namespace ctxr
