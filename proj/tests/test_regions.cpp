#include "test_util.hpp"

#include "ctxr/error.hpp"
#include "ctxr/regions.hpp"

#include <gtest/gtest.h>

using namespace ctxr;
namespace rn = ctxr::region_names;

namespace {

Mask2D rect(std::size_t w, std::size_t h, std::size_t x0, std::size_t x1, std::size_t y0, std::size_t y1)
{
    Mask2D m(w, h);
    for (std::size_t y = y0; y <= y1; ++y)
        for (std::size_t x = x0; x <= x1; ++x) m.at(x, y) = 1;
    return m;
}

std::pair<std::size_t, std::size_t> rows_of(const Mask2D& m)
{
    std::size_t top = m.height, bottom = 0;
    for (std::size_t y = 0; y < m.height; ++y)
        for (std::size_t x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                top = std::min(top, y);
                bottom = std::max(bottom, y);
            }
    return {top, bottom};
}

// Checks that `parts` are pairwise disjoint and union exactly to `source`.
void expect_partition(const Mask2D& source, const std::vector<const Mask2D*>& parts)
{
    for (std::size_t i = 0; i < source.data.size(); ++i) {
        int covered = 0;
        for (const Mask2D* p : parts) covered += p->data[i];
        EXPECT_EQ(covered, source.data[i]) << "pixel " << i;
    }
}

MaskSet2D random_set(std::mt19937_64& g, View view)
{
    MaskSet2D s(view, 64, 64, "blob");
    for (const char* name : {rn::mediastinum, rn::vertebra_t4, rn::heart, rn::trachea, rn::subdiaphragm, rn::aorta,
                             "lung_left", "lung_right", "clavicle_left", "clavicle_right"})
        s.set(name, test::random_blobs(g, 64, 64, test::uniform_int(g, 1, 4)));
    return s;
}

} // namespace

TEST(MediastinumT4, RowOracle)
{
    MaskSet2D s(View::frontal, 50, 120);
    s.set(rn::mediastinum, rect(50, 120, 10, 30, 10, 99));
    s.set(rn::vertebra_t4, rect(50, 120, 20, 25, 30, 40));
    const MaskSet2D out = split_mediastinum_t4(s);
    EXPECT_EQ(rows_of(*out.find(rn::mediastinum_upper)), (std::pair<std::size_t, std::size_t>{10, 40}));
    EXPECT_EQ(rows_of(*out.find(rn::mediastinum_lower)), (std::pair<std::size_t, std::size_t>{41, 99}));
    EXPECT_TRUE(out.entries().back().derived);
}

TEST(MediastinumT4, T4AboveMediastinum)
{
    MaskSet2D s(View::frontal, 50, 120);
    s.set(rn::mediastinum, rect(50, 120, 10, 30, 50, 99));
    s.set(rn::vertebra_t4, rect(50, 120, 20, 25, 5, 9));
    const MaskSet2D out = split_mediastinum_t4(s);
    EXPECT_EQ(count_foreground(*out.find(rn::mediastinum_upper)), 0u);
    EXPECT_EQ(*out.find(rn::mediastinum_lower), *s.find(rn::mediastinum));
}

TEST(MediastinumT4, MissingT4NamesClass)
{
    MaskSet2D s(View::frontal, 10, 10);
    s.set(rn::mediastinum, rect(10, 10, 1, 5, 1, 5));
    try {
        split_mediastinum_t4(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::missing_dependency);
        EXPECT_NE(std::string(e.what()).find("vertebrae_T4"), std::string::npos);
    }
}

TEST(MediastinumAntPost, SplitAtHeartBoundary)
{
    MaskSet2D s(View::lateral, 80, 60);
    s.set(rn::mediastinum_lower, rect(80, 60, 10, 60, 20, 50));
    Mask2D heart = rect(80, 60, 12, 30, 25, 45);
    heart.at(60, 48) = 1;  // reaches the posterior edge on row 48
    s.set(rn::heart, heart);
    const MaskSet2D out = split_mediastinum_ant_post(s);
    const Mask2D& ant = *out.find(rn::mediastinum_anterior);
    const Mask2D& post = *out.find(rn::mediastinum_posterior);
    for (std::size_t y = 25; y <= 45; ++y)
        for (std::size_t x = 10; x <= 60; ++x) EXPECT_EQ(ant.at(x, y), x <= 30 ? 1 : 0);
    for (std::size_t x = 10; x <= 60; ++x) EXPECT_EQ(ant.at(x, 48), 1);
    for (std::size_t x = 10; x <= 60; ++x) EXPECT_EQ(post.at(x, 22), 1);
    expect_partition(*s.find(rn::mediastinum_lower), {&ant, &post});
}

TEST(MediastinumAntPost, FrontalRejected)
{
    MaskSet2D s(View::frontal, 10, 10);
    try {
        split_mediastinum_ant_post(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::view_mismatch);
    }
}

TEST(LungZones, ThirdsOfNinetyRows)
{
    MaskSet2D s(View::frontal, 40, 100);
    for (const char* side : {"lung_left", "lung_right"}) s.set(side, rect(40, 100, 5, 15, 0, 89));
    s.set("clavicle_left", rect(40, 100, 5, 15, 3, 7));
    const auto r = lung_zones(s);
    EXPECT_EQ(rows_of(*r.masks.find("lung_left_upper_zone")), (std::pair<std::size_t, std::size_t>{0, 29}));
    EXPECT_EQ(rows_of(*r.masks.find("lung_left_middle_zone")), (std::pair<std::size_t, std::size_t>{30, 59}));
    EXPECT_EQ(rows_of(*r.masks.find("lung_left_lower_zone")), (std::pair<std::size_t, std::size_t>{60, 89}));
    EXPECT_EQ(rows_of(*r.masks.find("lung_left_apical")), (std::pair<std::size_t, std::size_t>{0, 7}));
    EXPECT_FALSE(r.masks.contains("lung_right_apical"));
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("clavicle_right"), std::string::npos);
}

TEST(LungZones, SuperiorLandmarkSwitch)
{
    MaskSet2D s(View::frontal, 40, 100);
    for (const char* side : {"lung_left", "lung_right"}) s.set(side, rect(40, 100, 5, 15, 0, 89));
    s.set("clavicle_left", rect(40, 100, 5, 15, 3, 7));
    RegionRuleConfig cfg;
    cfg.clavicle_landmark = ClavicleLandmark::superior;
    EXPECT_EQ(rows_of(*lung_zones(s, cfg).masks.find("lung_left_apical")), (std::pair<std::size_t, std::size_t>{0, 3}));
}

TEST(TrachealBifurcation, YShapedAirway)
{
    Mask2D t(40, 100);
    for (std::size_t y = 5; y < 60; ++y)
        for (std::size_t x = 18; x < 22; ++x) t.at(x, y) = 1;
    for (std::size_t y = 60; y < 90; ++y) {
        const std::size_t d = (y - 60) / 3;
        for (std::size_t x = 0; x < 3; ++x) {
            t.at(16 - d + x, y) = 1;
            t.at(22 + d + x, y) = 1;
        }
    }
    // Rowwise component-count oracle: first row from which every lower row has two runs.
    std::size_t oracle = 0;
    for (std::size_t y = 89; y > 0; --y) {
        std::size_t runs = 0;
        for (std::size_t x = 0; x < 40; ++x) runs += t.at(x, y) && (x == 0 || !t.at(x - 1, y));
        if (runs < 2) break;
        oracle = y;
    }
    ASSERT_EQ(trachea_split_row(t), std::optional<std::size_t>(oracle));
    EXPECT_EQ(oracle, 60u);
    MaskSet2D s(View::frontal, 40, 100);
    s.set(rn::trachea, t);
    EXPECT_EQ(rows_of(*tracheal_bifurcation(s, 10).find(rn::tracheal_bifurcation)).first, 50u);
    EXPECT_EQ(rows_of(*tracheal_bifurcation(s, 0).find(rn::tracheal_bifurcation)).first, 60u);
}

TEST(TrachealBifurcation, StraightTubeAndSpeckle)
{
    MaskSet2D s(View::frontal, 20, 50);
    Mask2D t = rect(20, 50, 8, 11, 2, 45);
    t.at(2, 20) = 1;  // isolated speckle does not persist
    s.set(rn::trachea, t);
    EXPECT_EQ(count_foreground(*tracheal_bifurcation(s).find(rn::tracheal_bifurcation)), 0u);
    EXPECT_THROW(tracheal_bifurcation(MaskSet2D(View::frontal, 4, 4)), Error);
}

TEST(Hemidiaphragm, CutColumnAndSymmetry)
{
    MaskSet2D s(View::frontal, 100, 50);
    s.set(rn::subdiaphragm, rect(100, 50, 20, 79, 10, 20));
    const MaskSet2D out = hemidiaphragm_split(s);
    const Mask2D& r = *out.find(rn::subdiaphragm_right);
    const Mask2D& l = *out.find(rn::subdiaphragm_left);
    for (std::size_t x = 20; x <= 79; ++x) EXPECT_EQ(r.at(x, 15), x <= 49 ? 1 : 0);
    EXPECT_EQ(count_foreground(r), count_foreground(l));
    MaskSet2D lateral(View::lateral, 100, 50);
    lateral.set(rn::subdiaphragm, rect(100, 50, 20, 79, 10, 20));
    try {
        hemidiaphragm_split(lateral);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::view_mismatch);
    }
}

TEST(SplitAorta, ArchAndLimbs)
{
    MaskSet2D s(View::frontal, 60, 100);
    Mask2D aorta = rect(60, 100, 20, 40, 20, 25);
    for (std::size_t y = 26; y < 80; ++y) {
        aorta.at(21, y) = 1;
        aorta.at(39, y) = 1;
    }
    s.set(rn::aorta, aorta);
    s.set(rn::vertebra_t4, rect(60, 100, 28, 32, 20, 30));
    const MaskSet2D out = split_aorta(s);
    const Mask2D &arch = *out.find(rn::aortic_arch), &asc = *out.find(rn::aorta_ascending),
                 &desc = *out.find(rn::aorta_descending);
    EXPECT_EQ(rows_of(arch).second, 30u);
    EXPECT_EQ(asc.at(21, 50), 1);
    EXPECT_EQ(desc.at(39, 50), 1);
    expect_partition(aorta, {&arch, &asc, &desc});
}

TEST(Partitions, RandomBlobSetsSplitExactly)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 100; ++trial) {
        for (View view : {View::frontal, View::lateral}) {
            MaskSet2D s = random_set(g, view);
            const MaskSet2D t4 = split_mediastinum_t4(s);
            expect_partition(*s.find(rn::mediastinum), {t4.find(rn::mediastinum_upper), t4.find(rn::mediastinum_lower)});
            const auto zones = lung_zones(s);
            for (const char* side : {"left", "right"}) {
                const std::string lung = std::string("lung_") + side;
                expect_partition(*s.find(lung), {zones.masks.find(lung + "_upper_zone"),
                                                 zones.masks.find(lung + "_middle_zone"),
                                                 zones.masks.find(lung + "_lower_zone")});
            }
            if (view == View::lateral) {
                MaskSet2D lower = s;
                lower.set(rn::mediastinum_lower, *s.find(rn::mediastinum));
                const MaskSet2D ap = split_mediastinum_ant_post(lower);
                expect_partition(*s.find(rn::mediastinum),
                                 {ap.find(rn::mediastinum_anterior), ap.find(rn::mediastinum_posterior)});
            } else {
                const MaskSet2D h = hemidiaphragm_split(s);
                expect_partition(*s.find(rn::subdiaphragm), {h.find(rn::subdiaphragm_right), h.find(rn::subdiaphragm_left)});
                const MaskSet2D a = split_aorta(s);
                expect_partition(*s.find(rn::aorta),
                                 {a.find(rn::aortic_arch), a.find(rn::aorta_ascending), a.find(rn::aorta_descending)});
            }
        }
    }
}

TEST(DeriveRegions, IdempotentAndInputPreserved)
{
    auto& g = test::rng();
    for (int trial = 0; trial < 20; ++trial) {
        for (View view : {View::frontal, View::lateral}) {
            const MaskSet2D s = random_set(g, view);
            const RegionResult once = derive_regions(s);
            const RegionResult twice = derive_regions(once.masks);
            EXPECT_EQ(encode_mask_archive(once.masks), encode_mask_archive(twice.masks));
            for (const auto& e : s.entries()) EXPECT_EQ(*once.masks.find(e.name), e.mask);
        }
    }
}

TEST(DeriveRegions, MissingInputsBecomeWarnings)
{
    MaskSet2D s(View::frontal, 20, 20);
    s.set("lung_left", rect(20, 20, 1, 5, 1, 15));
    s.set("lung_right", rect(20, 20, 10, 15, 1, 15));
    const RegionResult r = derive_regions(s);
    EXPECT_TRUE(r.masks.contains("lung_left_upper_zone"));
    EXPECT_GE(r.warnings.size(), 4u);
}

TEST(RegionRuleConfig, Validation)
{
    RegionRuleConfig c;
    c.bifurcation_offset_rows = -1;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.lung_zone_fractions = {0.5, 0.5, 0.1};
    EXPECT_THROW(c.validate(), Error);
}
