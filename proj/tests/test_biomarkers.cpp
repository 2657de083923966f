#include "test_util.hpp"

#include "ctxr/biomarkers.hpp"
#include "ctxr/error.hpp"
#include "ctxr/resize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ctxr;

namespace {

Mask2D rect(std::size_t w, std::size_t h, std::size_t x0, std::size_t x1, std::size_t y0, std::size_t y1)
{
    Mask2D m(w, h);
    for (std::size_t y = y0; y <= y1; ++y)
        for (std::size_t x = x0; x <= x1; ++x) m.at(x, y) = 1;
    return m;
}

double sum_to_line(const std::vector<Point2>& pts, double theta, double offset)
{
    // Line: {p : p . n = offset} with unit normal n = (cos theta, sin theta).
    double s = 0;
    for (const auto& p : pts) s += std::abs(p.x * std::cos(theta) + p.y * std::sin(theta) - offset);
    return s;
}

// Grid search over normal angle and offset.
double grid_search_scd(const std::vector<Point2>& pts, int angle_steps, double offset_step)
{
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < angle_steps; ++a) {
        const double theta = std::numbers::pi * a / angle_steps;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& p : pts) {
            const double proj = p.x * std::cos(theta) + p.y * std::sin(theta);
            lo = std::min(lo, proj);
            hi = std::max(hi, proj);
        }
        for (double o = std::floor(lo / offset_step) * offset_step; o <= hi + offset_step; o += offset_step)
            best = std::min(best, sum_to_line(pts, theta, o));
    }
    return best;
}

std::vector<Point2> random_points(std::mt19937_64& g, int n)
{
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) pts.push_back({test::uniform_real(g, -10, 10), 10.0 * i + test::uniform_real(g, -3, 3)});
    return pts;
}

MaskSet2D frontal_set()
{
    MaskSet2D s(View::frontal, 300, 200, "case");
    s.set("heart", rect(300, 200, 100, 199, 80, 140));
    s.set("lung_right", rect(300, 200, 25, 140, 20, 150));
    s.set("lung_left", rect(300, 200, 160, 274, 20, 150));
    for (int i = 1; i <= 5; ++i)
        s.set("vertebrae_T" + std::to_string(i), rect(300, 200, 145, 154, 20 * i, 20 * i + 10));
    return s;
}

} // namespace

TEST(Centroid, TrivialCasesAndSumOracle)
{
    Mask2D one(10, 10);
    one.at(3, 7) = 1;
    EXPECT_EQ(centroid(one).x, 3.0);
    EXPECT_EQ(centroid(one).y, 7.0);
    const Point2 c = centroid(rect(4, 4, 0, 1, 0, 1));
    EXPECT_EQ(c.x, 0.5);
    EXPECT_EQ(c.y, 0.5);
    auto& g = test::rng();
    for (int t = 0; t < 20; ++t) {
        const Mask2D m = test::random_blobs(g, 40, 30, 3);
        double sx = 0, sy = 0, n = 0;
        for (std::size_t y = 0; y < m.height; ++y)
            for (std::size_t x = 0; x < m.width; ++x)
                if (m.at(x, y)) {
                    sx += x;
                    sy += y;
                    ++n;
                }
        EXPECT_NEAR(centroid(m).x, sx / n, 1e-9);
        EXPECT_NEAR(centroid(m).y, sy / n, 1e-9);
    }
    try {
        centroid(Mask2D(3, 3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_mask);
    }
}

TEST(Centroid, TranslationEquivariant)
{
    auto& g = test::rng();
    for (int t = 0; t < 10; ++t) {
        const Mask2D m = test::random_blobs(g, 30, 30, 2);
        Mask2D shifted(45, 40);
        for (std::size_t y = 0; y < 30; ++y)
            for (std::size_t x = 0; x < 30; ++x) shifted.at(x + 11, y + 7) = m.at(x, y);
        EXPECT_NEAR(centroid(shifted).x, centroid(m).x + 11, 1e-9);
        EXPECT_NEAR(centroid(shifted).y, centroid(m).y + 7, 1e-9);
    }
}

TEST(Ctr, ConstructedRectangles)
{
    MaskSet2D s(View::frontal, 300, 200);
    s.set("heart", rect(300, 200, 100, 199, 80, 140));
    s.set("lung_right", rect(300, 200, 25, 140, 20, 150));
    s.set("lung_left", rect(300, 200, 160, 274, 20, 150));
    const CtrMeasurement m = measure_ctr(s);
    EXPECT_EQ(m.cardiac_width, 100u);
    EXPECT_EQ(m.thoracic_width, 250u);
    EXPECT_DOUBLE_EQ(m.ratio, 0.4);
    s.set("heart", rect(300, 200, 25, 274, 100, 101));
    EXPECT_DOUBLE_EQ(ctr(s), 1.0);
}

TEST(Ctr, WidestSingleRowNotBoundingBox)
{
    MaskSet2D s(View::frontal, 100, 100);
    Mask2D heart(100, 100);
    heart.at(10, 10) = 1;
    heart.at(50, 20) = 1;
    s.set("heart", heart);
    s.set("lung_right", rect(100, 100, 0, 49, 0, 90));
    s.set("lung_left", rect(100, 100, 50, 99, 0, 90));
    EXPECT_EQ(measure_ctr(s).cardiac_width, 1u);
}

TEST(Ctr, ErrorsAndScaleInvariance)
{
    MaskSet2D s = frontal_set();
    s.remove("lung_left");
    try {
        ctr(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::missing_dependency);
    }
    MaskSet2D lateral(View::lateral, 10, 10);
    EXPECT_THROW(ctr(lateral), Error);

    const MaskSet2D base = frontal_set();
    MaskSet2D big(View::frontal, 600, 400);
    for (const auto& e : base.entries()) big.set(e.name, resize_nearest(e.mask, 600, 400));
    const CtrMeasurement a = measure_ctr(base);
    EXPECT_LT(std::abs(a.ratio - ctr(big)), 2.0 / static_cast<double>(a.thoracic_width));
}

TEST(Scd, CollinearIsZero)
{
    std::vector<Point2> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({3.0 + 0.5 * i, 2.0 * i});
    EXPECT_NEAR(spine_center_distance(pts), 0.0, 1e-9);
    EXPECT_NEAR(spine_center_distance(pts, CenterlineFit::least_squares), 0.0, 1e-9);
}

TEST(Scd, SymmetricOffsetsMatchGridSearch)
{
    const std::vector<Point2> pts{{0, 0}, {2, 10}, {0, 20}, {-2, 30}, {0, 40}};
    const double oracle = grid_search_scd(pts, 3600, 0.01);
    EXPECT_NEAR(oracle, 4.0, 1e-9);
    EXPECT_NEAR(spine_center_distance(pts), oracle, 1e-9);
}

TEST(Scd, NeverWorseThanAnyGridLine)
{
    auto& g = test::rng();
    for (int t = 0; t < 20; ++t) {
        const auto pts = random_points(g, 8);
        const double scd = spine_center_distance(pts);
        const double oracle = grid_search_scd(pts, 720, 0.05);
        EXPECT_LE(scd, oracle + 1e-9);
        EXPECT_GT(scd, oracle - 0.5);
        EXPECT_LE(scd, spine_center_distance(pts, CenterlineFit::least_squares) + 1e-9);
    }
}

TEST(Scd, RotationAndScale)
{
    auto& g = test::rng();
    for (int t = 0; t < 20; ++t) {
        const auto pts = random_points(g, 12);
        const double base = spine_center_distance(pts);
        const double phi = test::uniform_real(g, 0, 2 * std::numbers::pi), k = test::uniform_real(g, 0.5, 3);
        std::vector<Point2> rot, scaled;
        for (const auto& p : pts) {
            rot.push_back({p.x * std::cos(phi) - p.y * std::sin(phi) + 5, p.x * std::sin(phi) + p.y * std::cos(phi) - 2});
            scaled.push_back({k * p.x, k * p.y});
        }
        EXPECT_NEAR(spine_center_distance(rot), base, 1e-6);
        EXPECT_NEAR(spine_center_distance(scaled), k * base, 1e-6 * k * std::max(1.0, base));
    }
}

TEST(Scd, InsufficientLandmarks)
{
    const std::vector<Point2> one{{1, 1}};
    try {
        spine_center_distance(one);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::insufficient_landmarks);
    }
}

TEST(Scd, FromMasksUsesNonEmptyVertebrae)
{
    MaskSet2D s = frontal_set();
    s.set("vertebrae_L2", Mask2D(300, 200));
    s.set("rib_posterior_left_1", rect(300, 200, 0, 5, 0, 5));
    const ScdMeasurement m = measure_scd(s);
    EXPECT_EQ(m.vertebra_count, 5u);
    EXPECT_NEAR(m.scd, 0.0, 1e-9);
}

TEST(Extract, FullPartialEmptyAndLateral)
{
    const BiomarkerRecord full = extract_biomarkers(frontal_set());
    EXPECT_EQ(full.image_id, "case");
    ASSERT_TRUE(full.ctr && full.scd);
    EXPECT_DOUBLE_EQ(*full.ctr, 0.4);
    EXPECT_NEAR(*full.scd_normalized, *full.scd / 200.0, 1e-12);
    EXPECT_TRUE(full.centerline.has_value());

    MaskSet2D no_spine = frontal_set();
    for (int i = 1; i <= 5; ++i) no_spine.remove("vertebrae_T" + std::to_string(i));
    const BiomarkerRecord partial = extract_biomarkers(no_spine);
    EXPECT_TRUE(partial.ctr.has_value());
    EXPECT_FALSE(partial.scd.has_value());
    EXPECT_EQ(partial.scd_reason, "insufficient-landmarks");

    const BiomarkerRecord empty = extract_biomarkers(MaskSet2D(View::frontal, 10, 10), "e");
    EXPECT_FALSE(empty.ctr || empty.scd);
    EXPECT_EQ(empty.ctr_reason, "missing-dependency");

    const BiomarkerRecord lateral = extract_biomarkers(MaskSet2D(View::lateral, 10, 10), "l");
    EXPECT_EQ(lateral.ctr_reason, "view-mismatch");
    EXPECT_EQ(lateral.scd_reason, "view-mismatch");
}

TEST(Extract, CsvRowHasNullsNotZeros)
{
    EXPECT_EQ(biomarker_csv_header(), "id,ctr,scd,scd_normalized,cardiac_width,thoracic_width,vertebra_count,ctr_reason,scd_reason");
    const BiomarkerRecord empty = extract_biomarkers(MaskSet2D(View::frontal, 10, 10), "e");
    EXPECT_EQ(biomarker_csv_row(empty), "e,,,,,,0,missing-dependency,insufficient-landmarks");
    const BiomarkerRecord full = extract_biomarkers(frontal_set());
    EXPECT_EQ(biomarker_csv_row(full).substr(0, 9), "case,0.4,");
}
