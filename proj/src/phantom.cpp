#include "ctxr/phantom.hpp"

#include "ctxr/error.hpp"
#include "ctxr/taxonomy.hpp"
#include "ctxr/volume_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using nlohmann::json;

namespace ctxr {

double SpineSpec::length() const
{
    if (levels.empty()) return 0.0;
    return static_cast<double>(levels.size()) * (level_height + gap) - gap;
}

PhantomSpec PhantomSpec::standard(Dims3 dims)
{
    if (dims.nx < 32 || dims.ny < 32 || dims.nz < 32)
        throw Error(ErrorCode::spec, "phantom grid must be at least 32 voxels per axis");
    // Maps the 256-voxel reference layout onto [0, n - 1] exactly, so every size keeps the same margins.
    const double sx = (static_cast<double>(dims.nx) - 1.0) / 255.0;
    const double sy = (static_cast<double>(dims.ny) - 1.0) / 255.0;
    const double sz = (static_cast<double>(dims.nz) - 1.0) / 255.0;
    const double cx = (static_cast<double>(dims.nx) - 1.0) / 2.0;
    auto X = [&](double dx) { return cx + dx * sx; };
    auto Y = [&](double v) { return v * sy; };
    auto Z = [&](double v) { return v * sz; };
    const double sxy = std::min(sx, sy);

    PhantomSpec s;
    s.grid.dims = dims;
    s.table_box = {{X(-120), Y(228), 0.0}, {X(120), Y(238), static_cast<double>(dims.nz) - 1.0}};
    s.body = {cx, Y(120), cx, 95 * sy, 0.0, static_cast<double>(dims.nz) - 1.0};
    s.lung_right = {{X(-70), Y(115), Z(120)}, {55 * sx, 60 * sy, 85 * sz}};
    s.lung_left = {{X(70), Y(115), Z(120)}, {55 * sx, 60 * sy, 85 * sz}};
    s.heart = {{X(10), Y(85), Z(150)}, {50 * sx, 40 * sy, 40 * sz}};

    s.spine.x = cx;
    s.spine.y = Y(185);
    s.spine.radius = 12 * sxy;
    s.spine.z_top = Z(20);
    s.spine.level_height = 10 * sz;
    s.spine.gap = 2 * sz;
    s.spine.levels = {"C7", "T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "T9", "T10", "T11", "T12", "L1"};
    s.spine.lateral_offsets.assign(s.spine.levels.size(), 0.0);

    s.ribs.pairs = 12;
    s.ribs.cx = cx;
    s.ribs.cy = Y(120);
    s.ribs.inner_rx = 112 * sx;
    s.ribs.inner_ry = 82 * sy;
    s.ribs.outer_rx = 118 * sx;
    s.ribs.outer_ry = 88 * sy;
    s.ribs.z_top = Z(45);
    s.ribs.spacing = 12 * sz;
    s.ribs.thickness = std::max(4 * sz, 1.0);
    s.ribs.spine_gap = 16 * sx;

    s.clavicles = {cx, Y(60), Z(40), 4 * std::min(sy, sz), 10 * sx, 80 * sx};
    s.trachea = {cx, Y(140), 7 * sx, Z(10), Z(80), 30 * sz};
    s.subdiaphragm = {{0.0, 0.0, Z(206)}, {static_cast<double>(dims.nx) - 1.0, static_cast<double>(dims.ny) - 1.0, Z(240)}};
    s.mediastinum = {{X(-15), Y(40), Z(30)}, {X(15), Y(175), Z(200)}};
    s.aorta = {true, X(-12), X(14), Y(150), Z(62), 6 * sxy, Z(120), Z(200)};
    return s;
}

namespace {

constexpr double eps = 1e-9;

struct Bounds {
    double lo[3];
    double hi[3];
};

void check_bounds(const Dims3& d, const Bounds& b, const std::string& shape)
{
    for (int a = 0; a < 3; ++a)
        if (b.lo[a] < -eps || b.hi[a] > static_cast<double>(d[a]) - 1.0 + eps || b.lo[a] > b.hi[a])
            throw Error(ErrorCode::spec, "phantom shape '" + shape + "' lies outside the " + std::to_string(d.nx) + "x" +
                                             std::to_string(d.ny) + "x" + std::to_string(d.nz) + " grid");
}

Bounds ellipsoid_bounds(const Ellipsoid& e)
{
    return {{e.center.x - e.radii.x, e.center.y - e.radii.y, e.center.z - e.radii.z},
            {e.center.x + e.radii.x, e.center.y + e.radii.y, e.center.z + e.radii.z}};
}

Bounds box_bounds(const AxisBox& b)
{
    return {{b.lo.x, b.lo.y, b.lo.z}, {b.hi.x, b.hi.y, b.hi.z}};
}

bool in_ellipsoid(const Ellipsoid& e, double x, double y, double z)
{
    const double dx = (x - e.center.x) / e.radii.x;
    const double dy = (y - e.center.y) / e.radii.y;
    const double dz = (z - e.center.z) / e.radii.z;
    return dx * dx + dy * dy + dz * dz <= 1.0;
}

bool in_ellipse(double x, double y, double cx, double cy, double rx, double ry)
{
    const double dx = (x - cx) / rx;
    const double dy = (y - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
}

bool in_box(const AxisBox& b, double x, double y, double z)
{
    return x >= b.lo.x && x <= b.hi.x && y >= b.lo.y && y <= b.hi.y && z >= b.lo.z && z <= b.hi.z;
}

double spine_level_x(const SpineSpec& s, std::size_t i)
{
    return s.x + s.lateral_offsets[i];
}

std::vector<Bounds> vertebra_bounds(const SpineSpec& s)
{
    std::vector<Bounds> out;
    for (std::size_t i = 0; i < s.levels.size(); ++i) {
        const double x = spine_level_x(s, i);
        const double top = s.level_top(i);
        out.push_back({{x - s.radius, s.y - s.radius, top}, {x + s.radius, s.y + s.radius, top + s.level_height - 1.0}});
    }
    return out;
}

double rib_top(const RibSpec& r, int index)
{
    return r.z_top + static_cast<double>(index - 1) * r.spacing;
}

bool in_rib(const RibSpec& r, int side_sign, double x, double y)
{
    if (y < r.cy) return false;
    if (side_sign < 0 ? x >= r.cx - r.spine_gap : x <= r.cx + r.spine_gap) return false;
    return in_ellipse(x, y, r.cx, r.cy, r.outer_rx, r.outer_ry) && !in_ellipse(x, y, r.cx, r.cy, r.inner_rx, r.inner_ry);
}

Bounds aorta_bounds(const AortaSpec& a)
{
    const double big = std::abs(a.x_descending - a.x_ascending) / 2.0;
    return {{std::min(a.x_ascending, a.x_descending) - a.radius, a.y - a.radius, a.z_arch - big - a.radius},
            {std::max(a.x_ascending, a.x_descending) + a.radius, a.y + a.radius,
             std::max({a.z_ascending_end, a.z_descending_end, a.z_arch})}};
}

bool in_aorta(const AortaSpec& a, double x, double y, double z)
{
    const double dy = y - a.y;
    const double r2 = a.radius * a.radius;
    auto tube = [&](double xc, double z_end) {
        const double dx = x - xc;
        return z >= a.z_arch && z <= z_end && dx * dx + dy * dy <= r2;
    };
    if (tube(a.x_ascending, a.z_ascending_end) || tube(a.x_descending, a.z_descending_end)) return true;
    if (z > a.z_arch) return false;
    const double xm = (a.x_ascending + a.x_descending) / 2.0;
    const double big = std::abs(a.x_descending - a.x_ascending) / 2.0;
    const double rho = std::hypot(x - xm, z - a.z_arch) - big;
    return rho * rho + dy * dy <= r2;
}

Bounds trachea_bounds(const TracheaSpec& t)
{
    return {{t.x - t.bronchus_drop - t.radius, t.y - t.radius, t.z_top},
            {t.x + t.bronchus_drop + t.radius, t.y + t.radius, t.bifurcation_z + t.bronchus_drop}};
}

bool in_trachea(const TracheaSpec& t, double x, double y, double z, double slope)
{
    const double dy = y - t.y;
    const double r2 = t.radius * t.radius;
    if (z < t.z_top || z > t.bifurcation_z + t.bronchus_drop) return false;
    if (z <= t.bifurcation_z) {
        const double dx = x - t.x;
        return dx * dx + dy * dy <= r2;
    }
    const double shift = (z - t.bifurcation_z) * slope;
    const double dl = x - (t.x - shift);
    const double dr = x - (t.x + shift);
    return dl * dl + dy * dy <= r2 || dr * dr + dy * dy <= r2;
}

/// Voxels of a shape inside a bounding region, tightly cropped.
class Rasterizer {
public:
    Rasterizer(Volume& volume, LabelVolume& labels) : volume_(volume), labels_(labels) {}

    using Pred = std::function<bool(double, double, double)>;

    /// Paints `hu` (if given) into every voxel of the shape and, if `label` is
    /// non-empty, records the support as a label class.
    void shape(const Bounds& b, const Pred& inside, std::optional<double> hu, const std::string& label)
    {
        const Dims3 d = volume_.dims();
        auto lo = [&](int a) {
            return static_cast<std::size_t>(std::max(0.0, std::ceil(b.lo[a] - eps)));
        };
        auto hi = [&](int a) {
            return static_cast<std::size_t>(
                std::clamp(std::floor(b.hi[a] + eps), 0.0, static_cast<double>(d[a]) - 1.0));
        };
        const std::size_t x0 = lo(0), y0 = lo(1), z0 = lo(2), x1 = hi(0), y1 = hi(1), z1 = hi(2);
        std::size_t tx0 = d.nx, ty0 = d.ny, tz0 = d.nz, tx1 = 0, ty1 = 0, tz1 = 0;
        std::vector<std::array<std::size_t, 3>> hits;
        if (x0 <= x1 && y0 <= y1 && z0 <= z1)
            for (std::size_t z = z0; z <= z1; ++z)
                for (std::size_t y = y0; y <= y1; ++y)
                    for (std::size_t x = x0; x <= x1; ++x) {
                        if (!inside(static_cast<double>(x), static_cast<double>(y), static_cast<double>(z))) continue;
                        if (hu) volume_.at(x, y, z) = static_cast<float>(*hu);
                        if (label.empty()) continue;
                        hits.push_back({x, y, z});
                        tx0 = std::min(tx0, x); tx1 = std::max(tx1, x);
                        ty0 = std::min(ty0, y); ty1 = std::max(ty1, y);
                        tz0 = std::min(tz0, z); tz1 = std::max(tz1, z);
                    }
        if (label.empty()) return;
        LabelMask m;
        m.name = label;
        if (!hits.empty()) {
            m.box = Box3{tx0, ty0, tz0, Dims3{tx1 - tx0 + 1, ty1 - ty0 + 1, tz1 - tz0 + 1}};
            m.data.assign(m.box.dims.count(), 0);
            for (const auto& h : hits)
                m.data[((h[2] - tz0) * m.box.dims.ny + (h[1] - ty0)) * m.box.dims.nx + (h[0] - tx0)] = 1;
        }
        pending_.push_back(std::move(m));
    }

    /// Labels are emitted in a fixed class order regardless of paint order.
    void flush(const std::vector<std::string>& order)
    {
        for (const auto& name : order)
            for (auto& m : pending_)
                if (m.name == name) labels_.add(std::move(m));
    }

private:
    Volume& volume_;
    LabelVolume& labels_;
    std::vector<LabelMask> pending_;
};

} // namespace

void PhantomSpec::validate() const
{
    grid.validate();
    const Dims3& d = grid.dims;
    if (noise_hu < 0.0) throw Error(ErrorCode::spec, "phantom noise amplitude must be non-negative");
    if (table) check_bounds(d, box_bounds(table_box), "table");
    check_bounds(d, {{body.cx - body.rx, body.cy - body.ry, body.z0}, {body.cx + body.rx, body.cy + body.ry, body.z1}},
                 "body");
    check_bounds(d, ellipsoid_bounds(lung_left), "lung_left");
    check_bounds(d, ellipsoid_bounds(lung_right), "lung_right");
    check_bounds(d, ellipsoid_bounds(heart), "heart");
    if (spine.lateral_offsets.size() != spine.levels.size())
        throw Error(ErrorCode::spec, "spine needs one lateral offset per level");
    for (const auto& level : spine.levels)
        if (!is_vertebra_class(vertebra_class(level)))
            throw Error(ErrorCode::spec, "unknown vertebra level '" + level + "'");
    const auto vb = vertebra_bounds(spine);
    for (std::size_t i = 0; i < vb.size(); ++i) check_bounds(d, vb[i], vertebra_class(spine.levels[i]));
    if (ribs.pairs < 0 || ribs.pairs > 12) throw Error(ErrorCode::spec, "rib pairs must be within 0..12");
    for (int i = 1; i <= ribs.pairs; ++i)
        check_bounds(d,
                     {{ribs.cx - ribs.outer_rx, ribs.cy, rib_top(ribs, i)},
                      {ribs.cx + ribs.outer_rx, ribs.cy + ribs.outer_ry, rib_top(ribs, i) + (ribs.thickness - 1.0)}},
                     posterior_rib_class("left", i));
    check_bounds(d,
                 {{clavicles.cx - clavicles.x_outer, clavicles.y - clavicles.radius, clavicles.z - clavicles.radius},
                  {clavicles.cx + clavicles.x_outer, clavicles.y + clavicles.radius, clavicles.z + clavicles.radius}},
                 "clavicle");
    check_bounds(d, trachea_bounds(trachea), "trachea");
    check_bounds(d, box_bounds(subdiaphragm), "subdiaphragm");
    check_bounds(d, box_bounds(mediastinum), "mediastinum");
    if (aorta.enabled) check_bounds(d, aorta_bounds(aorta), "aorta");
    const double window_lo = HuWindow{}.lo, window_hi = HuWindow{}.hi;
    for (double v : {hu.air, hu.soft_tissue, hu.lung, hu.trachea, hu.heart, hu.vertebra, hu.rib, hu.clavicle, hu.table})
        if (v - noise_hu < window_lo || v + noise_hu > window_hi)
            throw Error(ErrorCode::spec, "phantom HU values must stay inside the clip window");
}

Phantom generate_phantom(const PhantomSpec& spec)
{
    spec.validate();
    Phantom p;
    p.volume = Volume(spec.grid, static_cast<float>(spec.hu.air));
    p.volume.stored_as = ScalarType::int16;
    p.labels = LabelVolume(spec.grid);
    Rasterizer r(p.volume, p.labels);
    const auto& b = spec.body;
    auto in_body = [&](double x, double y, double z) {
        return z >= b.z0 && z <= b.z1 && in_ellipse(x, y, b.cx, b.cy, b.rx, b.ry);
    };

    if (spec.table)
        r.shape(box_bounds(spec.table_box), [&](double x, double y, double z) { return in_box(spec.table_box, x, y, z); },
                spec.hu.table, {});
    r.shape({{b.cx - b.rx, b.cy - b.ry, b.z0}, {b.cx + b.rx, b.cy + b.ry, b.z1}}, in_body, spec.hu.soft_tissue, {});
    r.shape(box_bounds(spec.subdiaphragm),
            [&](double x, double y, double z) { return in_box(spec.subdiaphragm, x, y, z) && in_body(x, y, z); },
            spec.hu.soft_tissue, "subdiaphragm");
    r.shape(box_bounds(spec.mediastinum), [&](double x, double y, double z) { return in_box(spec.mediastinum, x, y, z); },
            std::nullopt, "mediastinum");
    r.shape(ellipsoid_bounds(spec.lung_right),
            [&](double x, double y, double z) { return in_ellipsoid(spec.lung_right, x, y, z); }, spec.hu.lung,
            "lung_right");
    r.shape(ellipsoid_bounds(spec.lung_left),
            [&](double x, double y, double z) { return in_ellipsoid(spec.lung_left, x, y, z); }, spec.hu.lung,
            "lung_left");
    // Bronchi descend at 45 degrees in world space.
    const double slope = spec.grid.spacing.sz / spec.grid.spacing.sx;
    r.shape(trachea_bounds(spec.trachea),
            [&](double x, double y, double z) { return in_trachea(spec.trachea, x, y, z, slope); }, spec.hu.trachea,
            "trachea");
    if (spec.aorta.enabled)
        r.shape(aorta_bounds(spec.aorta), [&](double x, double y, double z) { return in_aorta(spec.aorta, x, y, z); },
                spec.hu.soft_tissue, "aorta");

    const RibSpec& rb = spec.ribs;
    for (int side_sign : {-1, 1}) {
        const std::string side = side_sign < 0 ? "right" : "left";
        for (int i = 1; i <= rb.pairs; ++i) {
            const double top = rib_top(rb, i);
            // Half-open slab, so a one-voxel rib still covers a slice when its top is fractional.
            const double end = top + rb.thickness;
            r.shape({{rb.cx - rb.outer_rx, rb.cy, top}, {rb.cx + rb.outer_rx, rb.cy + rb.outer_ry, end}},
                    [&](double x, double y, double z) { return z >= top && z < end && in_rib(rb, side_sign, x, y); },
                    spec.hu.rib, posterior_rib_class(side, i));
        }
    }

    const ClavicleSpec& c = spec.clavicles;
    for (int side_sign : {-1, 1}) {
        const std::string side = side_sign < 0 ? "right" : "left";
        auto in_clavicle = [&](double x, double y, double z) {
            const double off = (x - c.cx) * side_sign;
            const double dy = y - c.y, dz = z - c.z;
            return off >= c.x_inner && off <= c.x_outer && dy * dy + dz * dz <= c.radius * c.radius;
        };
        const double xa = c.cx + side_sign * c.x_inner, xb = c.cx + side_sign * c.x_outer;
        r.shape({{std::min(xa, xb), c.y - c.radius, c.z - c.radius}, {std::max(xa, xb), c.y + c.radius, c.z + c.radius}},
                in_clavicle, spec.hu.clavicle, "clavicle_" + side);
    }

    const SpineSpec& sp = spec.spine;
    const auto vb = vertebra_bounds(sp);
    for (std::size_t i = 0; i < sp.levels.size(); ++i) {
        const double xc = spine_level_x(sp, i);
        const double top = sp.level_top(i);
        const double end = top + sp.level_height;
        r.shape(vb[i],
                [&](double x, double y, double z) {
                    const double dx = x - xc, dy = y - sp.y;
                    return z >= top && z < end && dx * dx + dy * dy <= sp.radius * sp.radius;
                },
                spec.hu.vertebra, vertebra_class(sp.levels[i]));
    }

    r.shape(ellipsoid_bounds(spec.heart), [&](double x, double y, double z) { return in_ellipsoid(spec.heart, x, y, z); },
            spec.hu.heart, "heart");

    std::vector<std::string> order{"lung_right", "lung_left", "heart", "trachea", "mediastinum", "subdiaphragm"};
    if (spec.aorta.enabled) order.push_back("aorta");
    for (const auto& level : sp.levels) order.push_back(vertebra_class(level));
    for (const char* side : {"right", "left"})
        for (int i = 1; i <= rb.pairs; ++i) order.push_back(posterior_rib_class(side, i));
    order.push_back("clavicle_right");
    order.push_back("clavicle_left");
    r.flush(order);

    if (spec.noise_hu > 0.0) {
        const auto n = static_cast<std::uint64_t>(std::floor(spec.noise_hu));
        std::mt19937_64 rng(spec.seed);
        for (float& v : p.volume.data)
            v += static_cast<float>(static_cast<std::int64_t>(rng() % (2 * n + 1)) - static_cast<std::int64_t>(n));
    }
    return p;
}

PhantomSpec scoliosis_variant(const PhantomSpec& spec, double amplitude, double wavelength)
{
    if (amplitude < 0.0) throw Error(ErrorCode::argument, "scoliosis amplitude must be non-negative");
    if (!(wavelength > 0.0)) throw Error(ErrorCode::argument, "scoliosis wavelength must be positive");
    if (amplitude == 0.0) return spec;
    PhantomSpec out = spec;
    const SpineSpec& s = spec.spine;
    for (std::size_t i = 0; i < s.levels.size(); ++i)
        out.spine.lateral_offsets[i] +=
            amplitude * std::sin(2.0 * std::numbers::pi * (s.level_center(i) - s.z_top) / wavelength);
    return out;
}

PhantomSpec enlarged_heart_variant(const PhantomSpec& spec, double half_width)
{
    if (!(half_width > 0.0)) throw Error(ErrorCode::argument, "heart half-width must be positive");
    PhantomSpec out = spec;
    out.heart.radii.x = half_width;
    return out;
}

PhantomSpec symmetric_variant(const PhantomSpec& spec)
{
    PhantomSpec out = spec;
    out.heart.center.x = (static_cast<double>(spec.grid.dims.nx) - 1.0) / 2.0;
    out.aorta.enabled = false;
    return out;
}

PhantomSpec jitter_spec(const PhantomSpec& spec, std::uint64_t seed, double amount)
{
    if (amount < 0.0) throw Error(ErrorCode::argument, "jitter amount must be non-negative");
    PhantomSpec out = spec;
    out.seed = seed;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    auto u = [&] { return amount * (2.0 * std::ldexp(static_cast<double>(rng() >> 11), -53) - 1.0); };
    out.heart.center.x += u();
    out.heart.center.y += u();
    out.heart.center.z += u();
    out.heart.radii.x += 0.5 * u();
    out.heart.radii.z += 0.5 * u();
    for (Ellipsoid* lung : {&out.lung_left, &out.lung_right}) {
        lung->center.z += u();
        lung->radii.z += 0.5 * u();
        lung->radii.y += 0.5 * u();
    }
    out.trachea.bifurcation_z += u();
    out.clavicles.z += 0.5 * u();
    out.ribs.z_top += 0.5 * u();
    out.spine.z_top += 0.5 * u();
    out.aorta.z_arch += 0.5 * u();
    return out;
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
json ellipsoid_json(const Ellipsoid& e) { return {{"center", vec_json(e.center)}, {"radii", vec_json(e.radii)}}; }
Ellipsoid ellipsoid_from(const json& j) { return {vec_from(j.at("center")), vec_from(j.at("radii"))}; }
json box_json(const AxisBox& b) { return {{"lo", vec_json(b.lo)}, {"hi", vec_json(b.hi)}}; }
AxisBox box_from(const json& j) { return {vec_from(j.at("lo")), vec_from(j.at("hi"))}; }

} // namespace

std::string phantom_spec_to_json(const PhantomSpec& s)
{
    json j;
    j["grid"] = grid_to_json(s.grid);
    j["seed"] = s.seed;
    j["noise_hu"] = s.noise_hu;
    j["table"] = s.table;
    j["table_box"] = box_json(s.table_box);
    j["body"] = {{"cx", s.body.cx}, {"cy", s.body.cy}, {"rx", s.body.rx}, {"ry", s.body.ry}, {"z0", s.body.z0}, {"z1", s.body.z1}};
    j["lung_left"] = ellipsoid_json(s.lung_left);
    j["lung_right"] = ellipsoid_json(s.lung_right);
    j["heart"] = ellipsoid_json(s.heart);
    j["spine"] = {{"x", s.spine.x},           {"y", s.spine.y},       {"radius", s.spine.radius},
                  {"z_top", s.spine.z_top},   {"level_height", s.spine.level_height},
                  {"gap", s.spine.gap},       {"levels", s.spine.levels},
                  {"lateral_offsets", s.spine.lateral_offsets}};
    j["ribs"] = {{"pairs", s.ribs.pairs},         {"cx", s.ribs.cx},           {"cy", s.ribs.cy},
                 {"inner_rx", s.ribs.inner_rx},   {"inner_ry", s.ribs.inner_ry}, {"outer_rx", s.ribs.outer_rx},
                 {"outer_ry", s.ribs.outer_ry},   {"z_top", s.ribs.z_top},     {"spacing", s.ribs.spacing},
                 {"thickness", s.ribs.thickness}, {"spine_gap", s.ribs.spine_gap}};
    j["clavicles"] = {{"cx", s.clavicles.cx},         {"y", s.clavicles.y},           {"z", s.clavicles.z},
                      {"radius", s.clavicles.radius}, {"x_inner", s.clavicles.x_inner}, {"x_outer", s.clavicles.x_outer}};
    j["trachea"] = {{"x", s.trachea.x},         {"y", s.trachea.y},
                    {"radius", s.trachea.radius}, {"z_top", s.trachea.z_top},
                    {"bifurcation_z", s.trachea.bifurcation_z}, {"bronchus_drop", s.trachea.bronchus_drop}};
    j["subdiaphragm"] = box_json(s.subdiaphragm);
    j["mediastinum"] = box_json(s.mediastinum);
    j["aorta"] = {{"enabled", s.aorta.enabled},
                  {"x_ascending", s.aorta.x_ascending},
                  {"x_descending", s.aorta.x_descending},
                  {"y", s.aorta.y},
                  {"z_arch", s.aorta.z_arch},
                  {"radius", s.aorta.radius},
                  {"z_ascending_end", s.aorta.z_ascending_end},
                  {"z_descending_end", s.aorta.z_descending_end}};
    j["hu"] = {{"air", s.hu.air},           {"soft_tissue", s.hu.soft_tissue}, {"lung", s.hu.lung},
               {"trachea", s.hu.trachea},   {"heart", s.hu.heart},             {"vertebra", s.hu.vertebra},
               {"rib", s.hu.rib},           {"clavicle", s.hu.clavicle},       {"table", s.hu.table}};
    return j.dump(2);
}

PhantomSpec phantom_spec_from_json(const std::string& text)
{
    try {
        const json j = json::parse(text);
        PhantomSpec s;
        s.grid = grid_from_json(j.at("grid"));
        s.seed = j.at("seed").get<std::uint64_t>();
        s.noise_hu = j.at("noise_hu").get<double>();
        s.table = j.at("table").get<bool>();
        s.table_box = box_from(j.at("table_box"));
        const json& b = j.at("body");
        s.body = {b.at("cx"), b.at("cy"), b.at("rx"), b.at("ry"), b.at("z0"), b.at("z1")};
        s.lung_left = ellipsoid_from(j.at("lung_left"));
        s.lung_right = ellipsoid_from(j.at("lung_right"));
        s.heart = ellipsoid_from(j.at("heart"));
        const json& sp = j.at("spine");
        s.spine.x = sp.at("x");
        s.spine.y = sp.at("y");
        s.spine.radius = sp.at("radius");
        s.spine.z_top = sp.at("z_top");
        s.spine.level_height = sp.at("level_height");
        s.spine.gap = sp.at("gap");
        s.spine.levels = sp.at("levels").get<std::vector<std::string>>();
        s.spine.lateral_offsets = sp.at("lateral_offsets").get<std::vector<double>>();
        const json& r = j.at("ribs");
        s.ribs = {r.at("pairs"),    r.at("cx"),       r.at("cy"),    r.at("inner_rx"),  r.at("inner_ry"), r.at("outer_rx"),
                  r.at("outer_ry"), r.at("z_top"),    r.at("spacing"), r.at("thickness"), r.at("spine_gap")};
        const json& c = j.at("clavicles");
        s.clavicles = {c.at("cx"), c.at("y"), c.at("z"), c.at("radius"), c.at("x_inner"), c.at("x_outer")};
        const json& t = j.at("trachea");
        s.trachea = {t.at("x"), t.at("y"), t.at("radius"), t.at("z_top"), t.at("bifurcation_z"), t.at("bronchus_drop")};
        s.subdiaphragm = box_from(j.at("subdiaphragm"));
        s.mediastinum = box_from(j.at("mediastinum"));
        const json& a = j.at("aorta");
        s.aorta = {a.at("enabled"), a.at("x_ascending"), a.at("x_descending"), a.at("y"),
                   a.at("z_arch"),  a.at("radius"),      a.at("z_ascending_end"), a.at("z_descending_end")};
        const json& h = j.at("hu");
        s.hu = {h.at("air"), h.at("soft_tissue"), h.at("lung"), h.at("trachea"), h.at("heart"),
                h.at("vertebra"), h.at("rib"), h.at("clavicle"), h.at("table")};
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, std::string("phantom spec: ") + e.what());
    }
}

} // namespace ctxr
