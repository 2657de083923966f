#include "test_util.hpp"

#include "ctxr/error.hpp"
#include "ctxr/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ctxr;

namespace {

bool on_boundary(const Mask2D& m, std::size_t x, std::size_t y)
{
    if (!m.at(x, y)) return false;
    if (x == 0 || y == 0 || x + 1 == m.width || y + 1 == m.height) return true;
    return !m.at(x - 1, y) || !m.at(x + 1, y) || !m.at(x, y - 1) || !m.at(x, y + 1);
}

// Exhaustive pairwise Hausdorff over boundary pixels.
double brute_force_hausdorff(const Mask2D& a, const Mask2D& b)
{
    std::vector<std::pair<long, long>> pa, pb;
    for (std::size_t y = 0; y < a.height; ++y)
        for (std::size_t x = 0; x < a.width; ++x) {
            if (on_boundary(a, x, y)) pa.emplace_back(x, y);
            if (on_boundary(b, x, y)) pb.emplace_back(x, y);
        }
    auto directed = [](const auto& from, const auto& to) {
        long worst = 0;
        for (const auto& [x, y] : from) {
            long best = std::numeric_limits<long>::max();
            for (const auto& [u, v] : to) best = std::min(best, (x - u) * (x - u) + (y - v) * (y - v));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::sqrt(static_cast<double>(std::max(directed(pa, pb), directed(pb, pa))));
}

Mask2D shift(const Mask2D& m, long dx, long dy)
{
    Mask2D out(m.width, m.height);
    for (std::size_t y = 0; y < m.height; ++y)
        for (std::size_t x = 0; x < m.width; ++x) {
            const long nx = static_cast<long>(x) + dx, ny = static_cast<long>(y) + dy;
            if (m.at(x, y) && nx >= 0 && ny >= 0 && nx < static_cast<long>(m.width) && ny < static_cast<long>(m.height))
                out.at(nx, ny) = 1;
        }
    return out;
}

FeatureStats diag_stats(const Eigen::VectorXd& mu, const Eigen::VectorXd& var, const Eigen::VectorXd& mu_w,
                        const Eigen::VectorXd& var_w)
{
    FeatureStats s;
    s.mu = mu;
    s.mu_w = mu_w;
    s.sigma = var.asDiagonal();
    s.sigma_w = var_w.asDiagonal();
    return s;
}

// Mann-Whitney concordance: positive-negative pairs ordered correctly, ties half.
double concordance(const std::vector<double>& s, const std::vector<int>& l)
{
    std::uint64_t twice = 0, p = 0, n = 0;
    for (std::size_t i = 0; i < s.size(); ++i) (l[i] ? p : n) += 1;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (l[i] == 1 && l[j] == 0) twice += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
    return static_cast<double>(twice) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
}

} // namespace

TEST(IouDice, TrivialAndCountingCases)
{
    Mask2D a(4, 4), b(4, 4);
    a.at(1, 1) = 1;
    EXPECT_EQ(*iou_dice(a, a).iou, 1.0);
    EXPECT_EQ(*iou_dice(a, a).dice, 1.0);
    b.at(3, 3) = 1;
    EXPECT_EQ(*iou_dice(a, b).iou, 0.0);
    EXPECT_EQ(*iou_dice(a, b).dice, 0.0);
    Mask2D c(3, 1), d(3, 1);
    c.at(0, 0) = c.at(1, 0) = 1;
    d.at(1, 0) = d.at(2, 0) = 1;
    EXPECT_DOUBLE_EQ(*iou_dice(c, d).iou, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(*iou_dice(c, d).dice, 0.5);
    EXPECT_FALSE(iou_dice(Mask2D(2, 2), Mask2D(2, 2)).iou.has_value());
    EXPECT_THROW(iou_dice(Mask2D(2, 2), Mask2D(3, 2)), Error);
}

TEST(IouDice, DiceIouIdentityFromCounts)
{
    auto& g = test::rng();
    for (int t = 0; t < 200; ++t) {
        const Mask2D a = test::random_mask2d(g, 16, 16, test::uniform_real(g, 0, 1));
        const Mask2D b = test::random_mask2d(g, 16, 16, test::uniform_real(g, 0, 1));
        const Overlap o = overlap(a, b);
        if (o.union_size() == 0) continue;
        // dice = 2I/(A+B) and 2*iou/(1+iou) = 2I/(U+I) = 2I/(A+B) in integers.
        EXPECT_EQ(2 * o.intersection * (o.union_size() + o.intersection), 2 * o.intersection * (o.a + o.b));
        const IouDice s = iou_dice(a, b);
        EXPECT_NEAR(*s.dice, 2 * *s.iou / (1 + *s.iou), 1e-15);
    }
}

TEST(Hausdorff, TrivialCases)
{
    auto& g = test::rng();
    const Mask2D m = test::random_blobs(g, 20, 20, 3);
    EXPECT_EQ(*hausdorff(m, m), 0.0);
    Mask2D a(10, 10), b(10, 10);
    a.at(0, 0) = 1;
    b.at(3, 4) = 1;
    EXPECT_EQ(*hausdorff(a, b), 5.0);
    EXPECT_FALSE(hausdorff(a, Mask2D(10, 10)).has_value());
}

TEST(Hausdorff, MatchesBruteForceAndIsSymmetric)
{
    auto& g = test::rng();
    for (int t = 0; t < 200; ++t) {
        const Mask2D a = t % 2 ? test::random_blobs(g, 24, 20, 3) : test::random_mask2d(g, 24, 20, 0.1);
        const Mask2D b = t % 3 ? test::random_blobs(g, 24, 20, 2) : test::random_mask2d(g, 24, 20, 0.05);
        if (!count_foreground(a) || !count_foreground(b)) continue;
        EXPECT_EQ(*hausdorff(a, b), brute_force_hausdorff(a, b));
        EXPECT_EQ(*hausdorff(a, b), *hausdorff(b, a));
    }
}

TEST(Hausdorff, DistanceTransformMatchesBruteForce)
{
    auto& g = test::rng();
    const Mask2D m = test::random_mask2d(g, 15, 11, 0.05);
    const auto dt = squared_distance_transform(m);
    for (std::size_t y = 0; y < m.height; ++y)
        for (std::size_t x = 0; x < m.width; ++x) {
            std::uint64_t best = UINT64_MAX;
            for (std::size_t v = 0; v < m.height; ++v)
                for (std::size_t u = 0; u < m.width; ++u)
                    if (m.at(u, v)) {
                        const long dx = static_cast<long>(x) - static_cast<long>(u),
                                   dy = static_cast<long>(y) - static_cast<long>(v);
                        best = std::min<std::uint64_t>(best, dx * dx + dy * dy);
                    }
            EXPECT_EQ(dt[y * m.width + x], best);
        }
}

TEST(Evaluate, IdentityShiftAndUndefined)
{
    MaskSet2D gt(View::frontal, 40, 40);
    Mask2D heart(40, 40);
    for (std::size_t y = 10; y < 20; ++y)
        for (std::size_t x = 10; x < 20; ++x) heart.at(x, y) = 1;
    gt.set("heart", heart);
    gt.set("lung_left", shift(heart, 12, 0));
    gt.set("empty", Mask2D(40, 40));
    const SegScore same = evaluate_masksets(gt, gt);
    EXPECT_EQ(*same.mean_iou, 1.0);
    EXPECT_EQ(*same.mean_dice, 1.0);
    EXPECT_EQ(*same.mean_hausdorff, 0.0);
    EXPECT_EQ(same.undefined_overlap, std::vector<std::string>{"empty"});

    MaskSet2D pred = gt;
    pred.set("heart", shift(heart, 3, 0));
    const SegScore s = evaluate_masksets(pred, gt);
    EXPECT_EQ(*s.classes[0].hausdorff, 3.0);
    EXPECT_DOUBLE_EQ(*s.classes[0].iou, 70.0 / 130.0);
}

TEST(Evaluate, TaxonomyMismatchNamesClasses)
{
    MaskSet2D a(View::frontal, 4, 4), b(View::frontal, 4, 4);
    a.set("heart", Mask2D(4, 4));
    b.set("aorta", Mask2D(4, 4));
    try {
        evaluate_masksets(a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::taxonomy_mismatch);
        EXPECT_NE(std::string(e.what()).find("heart"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("aorta"), std::string::npos);
    }
}

TEST(Frechet, IdenticalIsZero)
{
    auto& g = test::rng();
    Eigen::MatrixXd x(50, 4);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = test::uniform_real(g, -1, 1);
    EXPECT_NEAR(frechet_distance(FeatureStats::from_features(x, x)), 0.0, 1e-9);
}

TEST(Frechet, OneDimensionalClosedForm)
{
    auto& g = test::rng();
    for (int t = 0; t < 100; ++t) {
        const double m1 = test::uniform_real(g, -5, 5), m2 = test::uniform_real(g, -5, 5);
        const double s1 = test::uniform_real(g, 0.01, 4), s2 = test::uniform_real(g, 0.01, 4);
        Eigen::VectorXd a(1), b(1), va(1), vb(1);
        a << m1;
        b << m2;
        va << s1 * s1;
        vb << s2 * s2;
        EXPECT_NEAR(frechet_distance(diag_stats(a, va, b, vb)), (m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2), 1e-8);
    }
}

TEST(Frechet, DiagonalClosedFormAndSymmetry)
{
    auto& g = test::rng();
    for (int dim = 1; dim <= 16; ++dim) {
        Eigen::VectorXd mu(dim), mw(dim), v(dim), vw(dim);
        double expected = 0;
        for (int i = 0; i < dim; ++i) {
            mu[i] = test::uniform_real(g, -3, 3);
            mw[i] = test::uniform_real(g, -3, 3);
            v[i] = test::uniform_real(g, 0.01, 9);
            vw[i] = test::uniform_real(g, 0.01, 9);
            expected += std::pow(mu[i] - mw[i], 2) + std::pow(std::sqrt(v[i]) - std::sqrt(vw[i]), 2);
        }
        EXPECT_NEAR(frechet_distance(diag_stats(mu, v, mw, vw)), expected, 1e-6);
        EXPECT_NEAR(frechet_distance(diag_stats(mu, v, mw, vw)), frechet_distance(diag_stats(mw, vw, mu, v)), 1e-6);
    }
}

TEST(Frechet, FullCovarianceSymmetric)
{
    auto& g = test::rng();
    Eigen::MatrixXd x(40, 5), y(60, 5);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = test::uniform_real(g, -1, 1);
    for (int i = 0; i < y.size(); ++i) y.data()[i] = test::uniform_real(g, -2, 1);
    const double ab = frechet_distance(FeatureStats::from_features(x, y));
    const double ba = frechet_distance(FeatureStats::from_features(y, x));
    EXPECT_NEAR(ab, ba, 1e-6);
    EXPECT_GT(ab, 0.0);
}

TEST(Frechet, InvalidCovarianceRejected)
{
    Eigen::VectorXd mu(2);
    mu << 0, 0;
    FeatureStats s;
    s.mu = s.mu_w = mu;
    s.sigma = Eigen::MatrixXd::Identity(2, 2);
    s.sigma_w = Eigen::MatrixXd::Identity(2, 2);
    s.sigma_w(0, 1) = 0.5;
    EXPECT_THROW(frechet_distance(s), Error);
    s.sigma_w = -Eigen::MatrixXd::Identity(2, 2);
    EXPECT_THROW(frechet_distance(s), Error);
}

TEST(TTest, IdenticalGroups)
{
    const std::vector<double> a{1, 2, 3, 4};
    const TTestResult r = t_test(a, a);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_NEAR(r.p, 1.0, 1e-12);
}

TEST(TTest, WelchByHand)
{
    const std::vector<double> pos{1.0, 1.001, 0.999, 1.0005}, neg{0.0, 0.001, -0.001, 0.0002};
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / v.size();
    };
    auto var = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / (v.size() - 1);
    };
    const double se2a = var(pos) / 4, se2b = var(neg) / 4;
    const double t = (mean(pos) - mean(neg)) / std::sqrt(se2a + se2b);
    const double df = std::pow(se2a + se2b, 2) / (se2a * se2a / 3 + se2b * se2b / 3);
    const TTestResult r = t_test(pos, neg);
    EXPECT_NEAR(r.t, t, 1e-9 * t);
    EXPECT_NEAR(r.df, df, 1e-9 * df);
    EXPECT_LT(r.p, 1e-4);
}

TEST(TTest, StudentPooledByHand)
{
    const std::vector<double> pos{2, 4, 6, 8}, neg{1, 2, 3};
    // Pooled variance: (3*20/3 + 2*1) / 5 = 12/5 after sums of squares 20 and 2.
    const double sp2 = (20.0 + 2.0) / 5.0;
    const double t = (5.0 - 2.0) / std::sqrt(sp2 * (1.0 / 4 + 1.0 / 3));
    const TTestResult r = t_test(pos, neg, TTestKind::student);
    EXPECT_NEAR(r.t, t, 1e-12);
    EXPECT_EQ(r.df, 5.0);
}

TEST(TTest, AntisymmetricAndAffineInvariant)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(30), y(40);
        for (auto& v : x) v = test::uniform_real(g, 0, 2);
        for (auto& v : y) v = test::uniform_real(g, -1, 1.5);
        const TTestResult r = t_test(x, y);
        EXPECT_NEAR(t_test(y, x).t, -r.t, 1e-12);
        const double a = trial % 2 ? 3.5 : -0.25, b = 17.0;
        std::vector<double> ax = x, ay = y;
        for (auto& v : ax) v = a * v + b;
        for (auto& v : ay) v = a * v + b;
        EXPECT_NEAR(t_test(ax, ay).t, (a > 0 ? 1 : -1) * r.t, 1e-9 * std::max(1.0, std::abs(r.t)));
    }
}

TEST(TTest, DegenerateSamples)
{
    const std::vector<double> one{1.0}, two{1.0, 1.0};
    try {
        t_test(one, two);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::degenerate_sample);
    }
    EXPECT_THROW(t_test(two, two), Error);
}

TEST(Roc, SeparatedTiedAndConcordance)
{
    const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
    const std::vector<int> l{0, 0, 1, 1};
    const RocResult r = roc_auc(s, l);
    EXPECT_EQ(r.auc, 1.0);
    EXPECT_EQ(r.curve.front().fpr, 0.0);
    EXPECT_EQ(r.curve.back().tpr, 1.0);
    const std::vector<double> same(4, 0.3);
    EXPECT_EQ(roc_auc(same, l).auc, 0.5);

    auto& g = test::rng();
    for (int t = 0; t < 100; ++t) {
        const int n = test::uniform_int(g, 2, 40);
        std::vector<double> sc(n);
        std::vector<int> lab(n);
        for (int i = 0; i < n; ++i) {
            sc[i] = test::uniform_int(g, 0, 8) / 4.0;
            lab[i] = i < 1 ? 0 : i < 2 ? 1 : test::uniform_int(g, 0, 1);
        }
        EXPECT_EQ(roc_auc(sc, lab).auc, concordance(sc, lab));
    }
}

TEST(Roc, NegatedScoresComplement)
{
    auto& g = test::rng();
    for (int t = 0; t < 50; ++t) {
        std::vector<double> sc(30), neg(30);
        std::vector<int> lab(30);
        for (int i = 0; i < 30; ++i) {
            sc[i] = test::uniform_real(g, 0, 1);
            neg[i] = -sc[i];
            lab[i] = i % 2;
        }
        EXPECT_NEAR(roc_auc(sc, lab).auc + roc_auc(neg, lab).auc, 1.0, 1e-12);
    }
}

TEST(Roc, SingleClassAndBadLabels)
{
    const std::vector<double> s{1, 2};
    const std::vector<int> one{1, 1}, bad{0, 2};
    try {
        roc_auc(s, one);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::undefined_metric);
    }
    EXPECT_THROW(roc_auc(s, bad), Error);
}
