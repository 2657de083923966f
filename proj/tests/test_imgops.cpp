#include "test_util.hpp"

#include "ctxr/error.hpp"
#include "ctxr/imgops.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include <deque>
#include <map>

using namespace ctxr;
using boost::multiprecision::cpp_rational;

namespace {

// Exhaustive Otsu: between-class variance w0*w1*(mu0 - mu1)^2 in exact
// rationals over every cut, first maximum wins.
std::size_t brute_force_otsu(const std::vector<std::uint64_t>& counts)
{
    std::size_t best = 0;
    cpp_rational best_score = -1;
    for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
        cpp_rational w0 = 0, w1 = 0, s0 = 0, s1 = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const cpp_rational c = counts[i];
            (i <= k ? w0 : w1) += c;
            (i <= k ? s0 : s1) += c * cpp_rational(i);
        }
        cpp_rational score = 0;
        if (w0 != 0 && w1 != 0) {
            const cpp_rational d = s0 / w0 - s1 / w1;
            score = w0 * w1 * d * d;
        }
        if (score > best_score) {
            best_score = score;
            best = k;
        }
    }
    return best;
}

// Breadth-first flood fill labeling in scan order of seeds.
std::vector<std::int32_t> flood_fill_labels(const Mask3D& m, bool full)
{
    const Dims3 d = m.dims;
    std::vector<std::int32_t> lab(m.data.size(), 0);
    std::int32_t next = 0;
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                if (!m.at(x, y, z) || lab[m.index(x, y, z)]) continue;
                ++next;
                std::deque<std::array<long, 3>> q{{static_cast<long>(x), static_cast<long>(y), static_cast<long>(z)}};
                lab[m.index(x, y, z)] = next;
                while (!q.empty()) {
                    const auto [cx, cy, cz] = q.front();
                    q.pop_front();
                    for (long dz = -1; dz <= 1; ++dz)
                        for (long dy = -1; dy <= 1; ++dy)
                            for (long dx = -1; dx <= 1; ++dx) {
                                const long man = std::abs(dx) + std::abs(dy) + std::abs(dz);
                                if (man == 0 || (!full && man > 1)) continue;
                                const long nx = cx + dx, ny = cy + dy, nz = cz + dz;
                                if (nx < 0 || ny < 0 || nz < 0 || nx >= static_cast<long>(d.nx) ||
                                    ny >= static_cast<long>(d.ny) || nz >= static_cast<long>(d.nz))
                                    continue;
                                const std::size_t i = m.index(nx, ny, nz);
                                if (m.data[i] && !lab[i]) {
                                    lab[i] = next;
                                    q.push_back({nx, ny, nz});
                                }
                            }
                }
            }
    return lab;
}

// Complement of the background reachable from the border (4-connected).
Mask2D border_flood_fill(const Mask2D& m)
{
    Mask2D outside(m.width, m.height);
    std::deque<std::pair<std::size_t, std::size_t>> q;
    auto push = [&](std::size_t x, std::size_t y) {
        if (!m.at(x, y) && !outside.at(x, y)) {
            outside.at(x, y) = 1;
            q.emplace_back(x, y);
        }
    };
    for (std::size_t x = 0; x < m.width; ++x) {
        push(x, 0);
        push(x, m.height - 1);
    }
    for (std::size_t y = 0; y < m.height; ++y) {
        push(0, y);
        push(m.width - 1, y);
    }
    while (!q.empty()) {
        const auto [x, y] = q.front();
        q.pop_front();
        if (x > 0) push(x - 1, y);
        if (y > 0) push(x, y - 1);
        if (x + 1 < m.width) push(x + 1, y);
        if (y + 1 < m.height) push(x, y + 1);
    }
    Mask2D out(m.width, m.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = outside.data[i] ? 0 : 1;
    return out;
}

Mask2D complement(Mask2D m)
{
    for (auto& v : m.data) v = v ? 0 : 1;
    return m;
}

Mask3D to3d(const Mask2D& m)
{
    Mask3D out({m.width, m.height, 1});
    out.data = m.data;
    return out;
}

} // namespace

TEST(Threshold, BoundaryInclusiveAndElementwise)
{
    GridSpec grid;
    grid.dims = {3, 3, 3};
    EXPECT_EQ(count_foreground(threshold(Volume(grid, 0.0f), -100, Compare::greater_equal)), 27u);
    EXPECT_EQ(count_foreground(threshold(Volume(grid, -100.0f), -100, Compare::greater_equal)), 27u);
    auto& g = test::rng();
    const Volume v = test::random_volume(g, {8, 7, 6}, -1024, 3071);
    const Mask3D ge = threshold(v, 10.0, Compare::greater_equal);
    const Mask3D le = threshold(v, 10.0, Compare::less_equal);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        EXPECT_EQ(ge.data[i], v.data[i] >= 10.0f ? 1 : 0);
        EXPECT_EQ(le.data[i], v.data[i] <= 10.0f ? 1 : 0);
    }
}

TEST(Threshold, MonotoneFamily)
{
    auto& g = test::rng();
    const Volume v = test::random_volume(g, {6, 6, 6}, -500, 500);
    for (int trial = 0; trial < 20; ++trial) {
        const double t1 = test::uniform_int(g, -500, 500), t2 = test::uniform_int(g, -500, 500);
        const Mask3D a = threshold(v, t1, Compare::greater_equal), b = threshold(v, t2, Compare::greater_equal);
        Mask3D u(a.dims);
        for (std::size_t i = 0; i < u.data.size(); ++i) u.data[i] = a.data[i] | b.data[i];
        EXPECT_EQ(u, threshold(v, std::min(t1, t2), Compare::greater_equal));
    }
}

TEST(Ght, TwoSpikesSeparated)
{
    Histogram h = Histogram::integer_bins(-1024, 3071);
    h.counts[0 + 1024] = 500;
    h.counts[1000 + 1024] = 300;
    const double t = ght_threshold(h, GhtParams::otsu());
    EXPECT_GT(t, 0.0);
    EXPECT_LE(t, 1000.0);
}

TEST(Ght, OtsuMatchesExhaustiveSearch)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 200; ++trial) {
        Histogram h = Histogram::integer_bins(0, 255);
        const bool sparse = trial % 2 == 0;
        for (auto& c : h.counts) c = sparse && test::uniform_int(g, 0, 3) != 0 ? 0 : test::uniform_int(g, 0, 1000);
        if (h.total() == 0) h.counts[7] = 1;
        EXPECT_EQ(ght_split(h, GhtParams::otsu()), brute_force_otsu(h.counts)) << "trial " << trial;
    }
}

TEST(Ght, TiesResolveToLowestCut)
{
    Histogram h = Histogram::integer_bins(0, 9);
    h.counts[2] = 5;
    h.counts[7] = 5;
    // Cuts 2..6 all separate the spikes perfectly.
    EXPECT_EQ(ght_split(h, GhtParams::otsu()), 2u);
    EXPECT_EQ(brute_force_otsu(h.counts), 2u);
}

TEST(Ght, MirroredHistogramMirrorsThreshold)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 50; ++trial) {
        Histogram h = Histogram::integer_bins(0, 63);
        for (std::size_t i = 0; i < 64; ++i) {
            const double a = std::exp(-0.5 * std::pow((static_cast<double>(i) - 15.0) / 4.0, 2));
            const double b = std::exp(-0.5 * std::pow((static_cast<double>(i) - 45.0) / 5.0, 2));
            h.counts[i] = static_cast<std::uint64_t>(1000 * a + 600 * b) + test::uniform_int(g, 0, 5);
        }
        Histogram m = h;
        std::reverse(m.counts.begin(), m.counts.end());
        const std::size_t k = ght_split(h, GhtParams::otsu());
        const std::size_t km = ght_split(m, GhtParams::otsu());
        // Cut after bin k separates {0..k}; mirrored, the same partition is the cut after 62 - k.
        // A tie between mirrored optima may resolve to either side, so compare scores via the oracle.
        EXPECT_EQ(brute_force_otsu(m.counts), km);
        if (km != 62 - k) {
            Histogram back = m;
            std::reverse(back.counts.begin(), back.counts.end());
            EXPECT_EQ(brute_force_otsu(back.counts), k);
        } else {
            EXPECT_EQ(km, 62 - k);
        }
    }
}

TEST(Ght, NonUniformEdgesUseBinCentres)
{
    Histogram h;
    h.edges = {0, 1, 2, 100, 101};
    h.counts = {10, 10, 10, 10};
    // Centres 0.5, 1.5, 51, 100.5: best cut separates the first two bins from the rest.
    EXPECT_EQ(ght_split(h, GhtParams::otsu()), 1u);
}

TEST(Ght, GeneralParamsAgreeOnWellSeparatedModes)
{
    Histogram h = Histogram::integer_bins(0, 99);
    for (std::size_t i = 0; i < 100; ++i)
        h.counts[i] = static_cast<std::uint64_t>(
            1000 * std::exp(-0.5 * std::pow((i - 20.0) / 3.0, 2)) + 1000 * std::exp(-0.5 * std::pow((i - 80.0) / 3.0, 2)));
    GhtParams p;
    p.nu = 10;
    p.tau = 1;
    p.kappa = 1;
    p.omega = 0.5;
    const double t = ght_threshold(h, p);
    EXPECT_GT(t, 30.0);
    EXPECT_LT(t, 70.0);
}

TEST(Ght, DegenerateInputs)
{
    Histogram one = Histogram::integer_bins(0, 0);
    one.counts[0] = 4;
    try {
        ght_split(one, GhtParams::otsu());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::degenerate_input);
    }
    EXPECT_THROW(ght_split(Histogram::integer_bins(0, 9), GhtParams::otsu()), Error);
    GhtParams bad;
    bad.omega = 2;
    Histogram h = Histogram::integer_bins(0, 3);
    h.counts = {1, 1, 1, 1};
    EXPECT_THROW(ght_split(h, bad), Error);
}

TEST(Components, EmptyAndTwoCubes)
{
    EXPECT_EQ(connected_components(Mask3D({5, 5, 5}), Connectivity::full).count(), 0u);
    Mask3D m({10, 10, 10});
    for (std::size_t z = 0; z < 3; ++z)
        for (std::size_t y = 0; y < 3; ++y)
            for (std::size_t x = 0; x < 3; ++x) {
                m.at(x, y, z) = 1;
                m.at(x + 5, y + 6, z + 6) = 1;
            }
    m.at(9, 9, 9) = 0;
    const Components c = connected_components(m, Connectivity::face);
    ASSERT_EQ(c.count(), 2u);
    EXPECT_EQ(c.sizes[0], 27u);
    EXPECT_EQ(c.sizes[1], 27u);
}

TEST(Components, MatchesFloodFillOracle)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 20; ++trial) {
        const Mask3D m = test::random_mask3d(g, {16, 16, 16}, 0.3);
        for (bool full : {false, true}) {
            const Components c = connected_components(m, full ? Connectivity::full : Connectivity::face);
            const auto oracle = flood_fill_labels(m, full);
            EXPECT_EQ(c.labels, oracle);
            std::size_t total = 0;
            for (auto s : c.sizes) total += s;
            EXPECT_EQ(total, count_foreground(m));
        }
    }
}

TEST(Components, TwoDimensionalDiagonal)
{
    Mask2D m(3, 3);
    m.at(0, 0) = 1;
    m.at(1, 1) = 1;
    EXPECT_EQ(connected_components(m, Connectivity::face).count(), 2u);
    EXPECT_EQ(connected_components(m, Connectivity::full).count(), 1u);
}

TEST(LargestComponent, KeepsBiggerBlobAndIsIdempotent)
{
    Mask2D m(30, 30);
    for (std::size_t y = 0; y < 10; ++y)
        for (std::size_t x = 0; x < 10; ++x) m.at(x + 15, y + 15) = 1;
    for (std::size_t x = 0; x < 5; ++x) m.at(x, 0) = 1;
    const Mask2D l = largest_component(m);
    EXPECT_EQ(count_foreground(l), 100u);
    EXPECT_EQ(l.at(0, 0), 0);
    EXPECT_EQ(largest_component(l), l);
    EXPECT_EQ(largest_component(Mask2D(4, 4)), Mask2D(4, 4));
}

TEST(LargestComponent, TieKeepsFirstSeed)
{
    Mask2D m(5, 1);
    m.at(0, 0) = 1;
    m.at(4, 0) = 1;
    const Mask2D l = largest_component(m);
    EXPECT_EQ(l.at(0, 0), 1);
    EXPECT_EQ(l.at(4, 0), 0);
}

TEST(LargestComponent, SizeMatchesOracleMaximum)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 20; ++trial) {
        const Mask3D m = test::random_mask3d(g, {12, 12, 12}, 0.25);
        const auto lab = flood_fill_labels(m, true);
        std::map<std::int32_t, std::size_t> sizes;
        for (auto l : lab)
            if (l) ++sizes[l];
        std::size_t best = 0;
        for (auto& [l, s] : sizes) best = std::max(best, s);
        const Mask3D out = largest_component(m);
        EXPECT_EQ(count_foreground(out), best);
        for (std::size_t i = 0; i < m.data.size(); ++i) EXPECT_LE(out.data[i], m.data[i]);
        EXPECT_EQ(largest_component(out), out);
    }
}

TEST(FillHoles, SolidUnchangedRingFilled)
{
    Mask2D solid(8, 8);
    for (std::size_t y = 2; y < 6; ++y)
        for (std::size_t x = 2; x < 6; ++x) solid.at(x, y) = 1;
    EXPECT_EQ(fill_holes(solid), solid);
    Mask2D ring = solid;
    ring.at(3, 3) = ring.at(4, 3) = ring.at(3, 4) = ring.at(4, 4) = 0;
    EXPECT_EQ(fill_holes(ring), solid);
}

TEST(FillHoles, MatchesBorderFloodOracleAndIsIdempotent)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 30; ++trial) {
        const Mask3D m = test::random_mask3d(g, {14, 11, 5}, 0.55);
        const Mask3D f = fill_holes_slicewise(m, 2);
        for (std::size_t z = 0; z < 5; ++z) {
            Mask2D slice(14, 11), filled(14, 11);
            for (std::size_t y = 0; y < 11; ++y)
                for (std::size_t x = 0; x < 14; ++x) {
                    slice.at(x, y) = m.at(x, y, z);
                    filled.at(x, y) = f.at(x, y, z);
                }
            EXPECT_EQ(filled, border_flood_fill(slice));
        }
        for (std::size_t i = 0; i < m.data.size(); ++i) EXPECT_GE(f.data[i], m.data[i]);
        EXPECT_EQ(fill_holes_slicewise(f, 2), f);
    }
}

TEST(FillHoles, OtherAxes)
{
    Mask3D m({5, 5, 5});
    for (std::size_t z = 0; z < 5; ++z)
        for (std::size_t x = 0; x < 5; ++x)
            if (x == 0 || x == 4 || z == 0 || z == 4) m.at(x, 2, z) = 1;
    const Mask3D f = fill_holes_slicewise(m, 1);
    EXPECT_EQ(f.at(2, 2, 2), 1);
    EXPECT_EQ(fill_holes_slicewise(m, 2).at(2, 2, 2), 0);
}

TEST(Morph, RadiusZeroIsIdentity)
{
    auto& g = test::rng();
    const Mask2D m = test::random_mask2d(g, 20, 20, 0.4);
    for (auto op : {MorphOp::erode, MorphOp::dilate, MorphOp::open, MorphOp::close}) EXPECT_EQ(morph(m, op, 0), m);
}

TEST(Morph, SinglePixelErodesAway)
{
    Mask2D m(5, 5);
    m.at(2, 2) = 1;
    EXPECT_EQ(count_foreground(morph(m, MorphOp::erode, 1)), 0u);
    EXPECT_EQ(count_foreground(morph(m, MorphOp::dilate, 1)), 5u);
    EXPECT_EQ(count_foreground(morph(m, MorphOp::dilate, 2)), 13u);
}

TEST(Morph, DilateRadiusOneIsUnionOfShifts)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 20; ++trial) {
        const Mask2D m = test::random_mask2d(g, 23, 17, 0.2);
        Mask2D oracle = m;
        for (std::size_t y = 0; y < m.height; ++y)
            for (std::size_t x = 0; x < m.width; ++x) {
                if (!m.at(x, y)) continue;
                if (x > 0) oracle.at(x - 1, y) = 1;
                if (y > 0) oracle.at(x, y - 1) = 1;
                if (x + 1 < m.width) oracle.at(x + 1, y) = 1;
                if (y + 1 < m.height) oracle.at(x, y + 1) = 1;
            }
        EXPECT_EQ(morph(m, MorphOp::dilate, 1), oracle);
        EXPECT_EQ(morph(to3d(m), MorphOp::dilate, 1).data, oracle.data);
    }
}

TEST(Morph, ExtensivityIdempotenceAndDuality)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 20; ++trial) {
        const int r = test::uniform_int(g, 1, 3);
        const std::size_t pad = 2 * static_cast<std::size_t>(r);
        Mask2D m(30, 30);
        const Mask2D core = test::random_mask2d(g, 30 - 2 * pad, 30 - 2 * pad, 0.5);
        for (std::size_t y = 0; y < core.height; ++y)
            for (std::size_t x = 0; x < core.width; ++x) m.at(x + pad, y + pad) = core.at(x, y);
        const Mask2D d = morph(m, MorphOp::dilate, r), e = morph(m, MorphOp::erode, r);
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            EXPECT_GE(d.data[i], m.data[i]);
            EXPECT_LE(e.data[i], m.data[i]);
        }
        const Mask2D o = morph(m, MorphOp::open, r), c = morph(m, MorphOp::close, r);
        EXPECT_EQ(morph(o, MorphOp::open, r), o);
        EXPECT_EQ(morph(c, MorphOp::close, r), c);
        const Mask2D dual = complement(morph(complement(m), MorphOp::erode, r));
        const std::size_t r_sz = static_cast<std::size_t>(r);
        for (std::size_t y = r_sz; y + r_sz < m.height; ++y)
            for (std::size_t x = r_sz; x + r_sz < m.width; ++x) EXPECT_EQ(dual.at(x, y), d.at(x, y));
    }
}

TEST(Morph, NegativeRadiusRejected)
{
    EXPECT_THROW(morph(Mask2D(3, 3), MorphOp::dilate, -1), Error);
}
