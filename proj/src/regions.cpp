#include "ctxr/regions.hpp"

#include "ctxr/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ctxr {

namespace rn = region_names;

void RegionRuleConfig::validate() const
{
    if (bifurcation_offset_rows < 0)
        throw Error(ErrorCode::config, "bifurcation_offset_rows must be non-negative");
    double sum = 0.0;
    for (double f : lung_zone_fractions) {
        if (!(f > 0.0)) throw Error(ErrorCode::config, "lung zone fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::config, "lung zone fractions must sum to 1");
}

std::string lung_zone_name(const std::string& side, const std::string& zone)
{
    return "lung_" + side + "_" + zone;
}

namespace {

struct RowRange {
    std::size_t top = 0;
    std::size_t bottom = 0;
};

std::optional<RowRange> row_range(const Mask2D& m)
{
    std::optional<RowRange> r;
    for (std::size_t y = 0; y < m.height; ++y)
        for (std::size_t x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                if (!r) r = RowRange{y, y};
                r->bottom = y;
                break;
            }
    return r;
}

struct ColRange {
    std::size_t left = 0;
    std::size_t right = 0;
};

std::optional<ColRange> col_range(const Mask2D& m)
{
    std::optional<ColRange> r;
    for (std::size_t y = 0; y < m.height; ++y)
        for (std::size_t x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                if (!r) r = ColRange{x, x};
                r->left = std::min(r->left, x);
                r->right = std::max(r->right, x);
            }
    return r;
}

Mask2D select(const Mask2D& m, const std::function<bool(std::size_t x, std::size_t y)>& keep)
{
    Mask2D out(m.width, m.height);
    for (std::size_t y = 0; y < m.height; ++y)
        for (std::size_t x = 0; x < m.width; ++x)
            out.at(x, y) = m.at(x, y) && keep(x, y) ? 1 : 0;
    return out;
}

void require_view(const MaskSet2D& masks, View view, const char* op)
{
    if (masks.view() != view)
        throw Error(ErrorCode::view_mismatch, std::string(op) + " requires a " + to_string(view) + " mask set, got " +
                                                  to_string(masks.view()));
}

std::size_t runs_in_row(const Mask2D& m, std::size_t y)
{
    std::size_t runs = 0;
    bool inside = false;
    for (std::size_t x = 0; x < m.width; ++x) {
        const bool on = m.at(x, y) != 0;
        if (on && !inside) ++runs;
        inside = on;
    }
    return runs;
}

} // namespace

MaskSet2D split_mediastinum_t4(const MaskSet2D& masks)
{
    const Mask2D& med = masks.require(rn::mediastinum);
    const std::size_t cut = row_range(masks.require(rn::vertebra_t4))->bottom;
    MaskSet2D out = masks;
    out.set(rn::mediastinum_upper, select(med, [&](std::size_t, std::size_t y) { return y <= cut; }), true);
    out.set(rn::mediastinum_lower, select(med, [&](std::size_t, std::size_t y) { return y > cut; }), true);
    return out;
}

MaskSet2D split_mediastinum_ant_post(const MaskSet2D& masks)
{
    require_view(masks, View::lateral, "split_mediastinum_ant_post");
    const Mask2D& lower = masks.require(rn::mediastinum_lower);
    const Mask2D& heart = masks.require(rn::heart);
    // Posterior heart boundary per row; rows without heart keep no anterior part.
    std::vector<std::optional<std::size_t>> boundary(heart.height);
    for (std::size_t y = 0; y < heart.height; ++y)
        for (std::size_t x = 0; x < heart.width; ++x)
            if (heart.at(x, y)) boundary[y] = x;
    auto anterior = [&](std::size_t x, std::size_t y) { return boundary[y] && x <= *boundary[y]; };
    MaskSet2D out = masks;
    out.set(rn::mediastinum_anterior, select(lower, anterior), true);
    out.set(rn::mediastinum_posterior, select(lower, [&](std::size_t x, std::size_t y) { return !anterior(x, y); }), true);
    return out;
}

LungZoneResult lung_zones(const MaskSet2D& masks, const RegionRuleConfig& config)
{
    config.validate();
    LungZoneResult result{masks, {}};
    for (const std::string side : {"right", "left"}) {
        const Mask2D& lung = masks.require("lung_" + side);
        const RowRange rows = *row_range(lung);
        const double h = static_cast<double>(rows.bottom - rows.top + 1);
        const double f1 = config.lung_zone_fractions[0];
        const double f2 = f1 + config.lung_zone_fractions[1];
        // Tolerance keeps exact thirds from rounding up past the intended row.
        const std::size_t cut1 = rows.top + static_cast<std::size_t>(std::ceil(h * f1 - 1e-9));
        const std::size_t cut2 = rows.top + static_cast<std::size_t>(std::ceil(h * f2 - 1e-9));
        result.masks.set(lung_zone_name(side, "upper_zone"),
                         select(lung, [&](std::size_t, std::size_t y) { return y < cut1; }), true);
        result.masks.set(lung_zone_name(side, "middle_zone"),
                         select(lung, [&](std::size_t, std::size_t y) { return y >= cut1 && y < cut2; }), true);
        result.masks.set(lung_zone_name(side, "lower_zone"),
                         select(lung, [&](std::size_t, std::size_t y) { return y >= cut2; }), true);

        const Mask2D* clavicle = masks.find_nonempty("clavicle_" + side);
        if (!clavicle) {
            result.warnings.push_back("apical region for lung_" + side + " skipped: clavicle_" + side + " missing");
            continue;
        }
        const RowRange crow = *row_range(*clavicle);
        const std::size_t landmark = config.clavicle_landmark == ClavicleLandmark::inferior ? crow.bottom : crow.top;
        result.masks.set(lung_zone_name(side, "apical"),
                         select(lung, [&](std::size_t, std::size_t y) { return y <= landmark; }), true);
    }
    return result;
}

std::optional<std::size_t> trachea_split_row(const Mask2D& trachea)
{
    const auto rows = row_range(trachea);
    if (!rows) return std::nullopt;
    std::size_t y = rows->bottom + 1;
    while (y > rows->top && runs_in_row(trachea, y - 1) >= 2) --y;
    if (y > rows->bottom) return std::nullopt;
    return y;
}

MaskSet2D tracheal_bifurcation(const MaskSet2D& masks, int offset_rows)
{
    if (offset_rows < 0) throw Error(ErrorCode::argument, "bifurcation offset must be non-negative");
    const Mask2D& trachea = masks.require(rn::trachea);
    const auto split = trachea_split_row(trachea);
    MaskSet2D out = masks;
    Mask2D region(trachea.width, trachea.height);
    if (split) {
        const auto off = static_cast<std::size_t>(offset_rows);
        const std::size_t start = *split > off ? *split - off : 0;
        region = select(trachea, [&](std::size_t, std::size_t y) { return y >= start; });
    }
    out.set(rn::tracheal_bifurcation, std::move(region), true);
    return out;
}

MaskSet2D hemidiaphragm_split(const MaskSet2D& masks)
{
    require_view(masks, View::frontal, "hemidiaphragm_split");
    const Mask2D& sub = masks.require(rn::subdiaphragm);
    const ColRange cols = *col_range(sub);
    const std::size_t cut = (cols.left + cols.right) / 2;
    MaskSet2D out = masks;
    out.set(rn::subdiaphragm_right, select(sub, [&](std::size_t x, std::size_t) { return x <= cut; }), true);
    out.set(rn::subdiaphragm_left, select(sub, [&](std::size_t x, std::size_t) { return x > cut; }), true);
    return out;
}

MaskSet2D split_aorta(const MaskSet2D& masks)
{
    require_view(masks, View::frontal, "split_aorta");
    const Mask2D& aorta = masks.require(rn::aorta);
    const std::size_t cut = row_range(masks.require(rn::vertebra_t4))->bottom;
    const Mask2D arch = select(aorta, [&](std::size_t, std::size_t y) { return y <= cut; });
    const auto arch_cols = col_range(arch);
    const ColRange cols = arch_cols ? *arch_cols : *col_range(aorta);
    const std::size_t center = (cols.left + cols.right) / 2;
    MaskSet2D out = masks;
    out.set(rn::aortic_arch, arch, true);
    out.set(rn::aorta_ascending, select(aorta, [&](std::size_t x, std::size_t y) { return y > cut && x <= center; }), true);
    out.set(rn::aorta_descending, select(aorta, [&](std::size_t x, std::size_t y) { return y > cut && x > center; }), true);
    return out;
}

RegionResult derive_regions(const MaskSet2D& masks, const RegionRuleConfig& config)
{
    config.validate();
    RegionResult result{masks, {}};
    for (const auto& e : masks.entries())
        if (e.derived) result.masks.remove(e.name);

    auto attempt = [&](const char* rule, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::missing_dependency) throw;
            result.warnings.push_back(std::string(rule) + ": " + e.what());
        }
    };
    const bool frontal = masks.view() == View::frontal;

    if (config.mediastinum_t4)
        attempt("mediastinum_t4", [&] { result.masks = split_mediastinum_t4(result.masks); });
    if (config.mediastinum_ant_post && !frontal)
        attempt("mediastinum_ant_post", [&] { result.masks = split_mediastinum_ant_post(result.masks); });
    if (config.lung_zones)
        attempt("lung_zones", [&] {
            auto zones = lung_zones(result.masks, config);
            result.masks = std::move(zones.masks);
            for (auto& w : zones.warnings) result.warnings.push_back("lung_zones: " + w);
        });
    if (config.tracheal_bifurcation && frontal)
        attempt("tracheal_bifurcation",
                [&] { result.masks = tracheal_bifurcation(result.masks, config.bifurcation_offset_rows); });
    if (config.hemidiaphragm && frontal)
        attempt("hemidiaphragm", [&] { result.masks = hemidiaphragm_split(result.masks); });
    if (config.split_aorta && frontal)
        attempt("aorta", [&] { result.masks = split_aorta(result.masks); });
    return result;
}

} // namespace ctxr
