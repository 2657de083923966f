#include "ctxr/imgops.hpp"

#include "ctxr/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace ctxr {

Mask3D threshold(const Volume& volume, double t, Compare sense)
{
    Mask3D out(volume.dims());
    for (std::size_t i = 0; i < volume.data.size(); ++i) {
        const double v = volume.data[i];
        out.data[i] = (sense == Compare::greater_equal ? v >= t : v <= t) ? 1 : 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Histogram thresholding

Histogram Histogram::integer_bins(int lo, int hi)
{
    if (hi < lo) throw Error(ErrorCode::argument, "integer_bins requires lo <= hi");
    Histogram h;
    const auto n = static_cast<std::size_t>(hi - lo + 1);
    h.counts.assign(n, 0);
    h.edges.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) h.edges[i] = lo + static_cast<double>(i);
    return h;
}

std::uint64_t Histogram::total() const
{
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

void Histogram::validate() const
{
    if (counts.empty()) throw Error(ErrorCode::degenerate_input, "histogram has no bins");
    if (edges.size() != counts.size() + 1)
        throw Error(ErrorCode::argument, "histogram needs bins + 1 edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw Error(ErrorCode::argument, "histogram edges must increase");
}

bool GhtParams::is_otsu_limit() const
{
    return std::isinf(nu) && tau == 0.0 && kappa == 0.0;
}

void GhtParams::validate() const
{
    if (!(nu >= 0.0) || !(tau >= 0.0) || !(kappa >= 0.0) || !(omega >= 0.0 && omega <= 1.0))
        throw Error(ErrorCode::argument, "GHT parameters require nu, tau, kappa >= 0 and omega in [0, 1]");
}

namespace {

using i128 = __int128;
using boost::multiprecision::int256_t;

// Otsu: maximize the between-class term (S0*w1 - S1*w0)^2 / (w0*w1) over cuts,
// with bin indices as values. Integer sums and cross-multiplied comparisons
// keep the argmax exact; bounds hold for totals below 2^32 and 2^20 bins.
std::size_t otsu_split_exact(const std::vector<std::uint64_t>& n)
{
    const std::size_t bins = n.size();
    i128 total_w = 0, total_s = 0;
    for (std::size_t i = 0; i < bins; ++i) {
        total_w += n[i];
        total_s += static_cast<i128>(n[i]) * static_cast<i128>(i);
    }
    i128 w0 = 0, s0 = 0;
    int256_t best_num = -1, best_den = 1;
    std::size_t best = 0;
    for (std::size_t k = 0; k + 1 < bins; ++k) {
        w0 += n[k];
        s0 += static_cast<i128>(n[k]) * static_cast<i128>(k);
        const i128 w1 = total_w - w0;
        const i128 s1 = total_s - s0;
        int256_t num = 0, den = 1;
        if (w0 != 0 && w1 != 0) {
            const int256_t diff = int256_t(s0) * int256_t(w1) - int256_t(s1) * int256_t(w0);
            num = diff * diff;
            den = int256_t(w0) * int256_t(w1);
        }
        if (best_num < 0 || num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            best = k;
        }
    }
    return best;
}

bool uniform_bins(const Histogram& hist)
{
    const double w = hist.edges[1] - hist.edges[0];
    for (std::size_t i = 1; i + 1 < hist.edges.size(); ++i)
        if (hist.edges[i + 1] - hist.edges[i] != w) return false;
    return true;
}

// Floating-point Otsu over bin centres, for large totals or non-uniform bins.
std::size_t otsu_split_float(const Histogram& hist)
{
    const auto& n = hist.counts;
    std::vector<long double> x(n.size());
    for (std::size_t i = 0; i < n.size(); ++i)
        x[i] = 0.5L * (static_cast<long double>(hist.edges[i]) + hist.edges[i + 1]) - hist.edges[0];
    long double total_w = 0, total_s = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        total_w += n[i];
        total_s += static_cast<long double>(n[i]) * x[i];
    }
    long double w0 = 0, s0 = 0, best_score = -1;
    std::size_t best = 0;
    for (std::size_t k = 0; k + 1 < n.size(); ++k) {
        w0 += n[k];
        s0 += static_cast<long double>(n[k]) * x[k];
        const long double w1 = total_w - w0, s1 = total_s - s0;
        long double score = 0;
        if (w0 > 0) score += s0 * s0 / w0;
        if (w1 > 0) score += s1 * s1 / w1;
        if (score > best_score) {
            best_score = score;
            best = k;
        }
    }
    return best;
}

std::size_t ght_split_general(const Histogram& hist, const GhtParams& p)
{
    constexpr double kClip = 1e-30;
    const std::size_t bins = hist.bins();
    std::vector<double> x(bins);
    for (std::size_t i = 0; i < bins; ++i) x[i] = 0.5 * (hist.edges[i] + hist.edges[i + 1]);
    // Shift values to the histogram centre to keep the moment sums well conditioned.
    const double shift = 0.5 * (x.front() + x.back());
    double tw = 0, ts = 0, tq = 0;
    for (std::size_t i = 0; i < bins; ++i) {
        const double c = static_cast<double>(hist.counts[i]), xi = x[i] - shift;
        tw += c;
        ts += c * xi;
        tq += c * xi * xi;
    }
    double cw = 0, cs = 0, cq = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t k = 0; k + 1 < bins; ++k) {
        const double c = static_cast<double>(hist.counts[k]), xk = x[k] - shift;
        cw += c;
        cs += c * xk;
        cq += c * xk * xk;
        const double w0 = std::max(kClip, cw);
        const double w1 = std::max(kClip, tw - cw);
        const double p0 = w0 / (w0 + w1);
        const double p1 = w1 / (w0 + w1);
        const double mu0 = cs / w0;
        const double mu1 = (ts - cs) / w1;
        const double d0 = std::max(0.0, cq - w0 * mu0 * mu0);
        const double d1 = std::max(0.0, (tq - cq) - w1 * mu1 * mu1);
        double v0, v1;
        if (std::isinf(p.nu)) {
            v0 = v1 = std::max(kClip, p.tau * p.tau);
        } else {
            v0 = std::max(kClip, (p0 * p.nu * p.tau * p.tau + d0) / (p0 * p.nu + w0));
            v1 = std::max(kClip, (p1 * p.nu * p.tau * p.tau + d1) / (p1 * p.nu + w1));
        }
        const double f0 = -d0 / v0 - w0 * std::log(v0) + 2.0 * (w0 + p.kappa * p.omega) * std::log(w0);
        const double f1 = -d1 / v1 - w1 * std::log(v1) + 2.0 * (w1 + p.kappa * (1.0 - p.omega)) * std::log(w1);
        const double score = f0 + f1;
        if (score > best_score) {
            best_score = score;
            best = k;
        }
    }
    return best;
}

} // namespace

std::size_t ght_split(const Histogram& hist, const GhtParams& params)
{
    hist.validate();
    params.validate();
    if (hist.bins() < 2)
        throw Error(ErrorCode::degenerate_input, "generalized histogram thresholding needs at least two bins");
    const std::uint64_t total = hist.total();
    if (total == 0) throw Error(ErrorCode::degenerate_input, "histogram is empty");
    if (params.is_otsu_limit()) {
        if (total < (std::uint64_t{1} << 32) && hist.bins() <= (std::size_t{1} << 20) && uniform_bins(hist))
            return otsu_split_exact(hist.counts);
        return otsu_split_float(hist);
    }
    return ght_split_general(hist, params);
}

double ght_threshold(const Histogram& hist, const GhtParams& params)
{
    return hist.edges[ght_split(hist, params) + 1];
}

// ---------------------------------------------------------------------------
// Connected components

namespace {

struct Offset {
    int dx, dy, dz;
};

std::vector<Offset> neighbour_offsets(const Dims3& d, Connectivity c)
{
    std::vector<Offset> out;
    const int zr = d.nz > 1 ? 1 : 0;
    for (int dz = -zr; dz <= zr; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (manhattan == 0) continue;
                if (c == Connectivity::face && manhattan != 1) continue;
                out.push_back({dx, dy, dz});
            }
    return out;
}

Components label_components(const Dims3& d, const std::vector<std::uint8_t>& mask, Connectivity c)
{
    Components comp;
    comp.dims = d;
    comp.labels.assign(mask.size(), 0);
    const auto offsets = neighbour_offsets(d, c);
    std::vector<std::ptrdiff_t> linear;
    for (const auto& o : offsets)
        linear.push_back((static_cast<std::ptrdiff_t>(o.dz) * static_cast<std::ptrdiff_t>(d.ny) + o.dy) *
                             static_cast<std::ptrdiff_t>(d.nx) + o.dx);
    const std::size_t plane = d.nx * d.ny;
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < mask.size(); ++seed) {
        if (!mask[seed] || comp.labels[seed] != 0) continue;
        const auto id = static_cast<std::int32_t>(comp.sizes.size() + 1);
        comp.labels[seed] = id;
        std::size_t size = 0;
        stack.assign(1, seed);
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            ++size;
            const std::size_t z = idx / plane;
            const std::size_t y = (idx % plane) / d.nx;
            const std::size_t x = idx % d.nx;
            const bool interior = x > 0 && x + 1 < d.nx && y > 0 && y + 1 < d.ny &&
                                  (d.nz == 1 || (z > 0 && z + 1 < d.nz));
            for (std::size_t k = 0; k < offsets.size(); ++k) {
                if (!interior) {
                    const auto nx = static_cast<std::ptrdiff_t>(x) + offsets[k].dx;
                    const auto ny = static_cast<std::ptrdiff_t>(y) + offsets[k].dy;
                    const auto nz = static_cast<std::ptrdiff_t>(z) + offsets[k].dz;
                    if (nx < 0 || ny < 0 || nz < 0 || nx >= static_cast<std::ptrdiff_t>(d.nx) ||
                        ny >= static_cast<std::ptrdiff_t>(d.ny) || nz >= static_cast<std::ptrdiff_t>(d.nz))
                        continue;
                }
                const auto n = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + linear[k]);
                if (mask[n] && comp.labels[n] == 0) {
                    comp.labels[n] = id;
                    stack.push_back(n);
                }
            }
        }
        comp.sizes.push_back(size);
        comp.seeds.push_back(seed);
    }
    return comp;
}

Dims3 dims_of(const Mask2D& m) { return Dims3{m.width, m.height, 1}; }

std::vector<std::uint8_t> keep_largest(const Dims3& d, const std::vector<std::uint8_t>& mask, Connectivity c)
{
    const Components comp = label_components(d, mask, c);
    std::vector<std::uint8_t> out(mask.size(), 0);
    if (comp.count() == 0) return out;
    // Labels are assigned in seed scan order, so the first maximum has the lowest seed.
    const auto best = static_cast<std::int32_t>(
        std::max_element(comp.sizes.begin(), comp.sizes.end()) - comp.sizes.begin() + 1);
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = comp.labels[i] == best ? 1 : 0;
    return out;
}

// Slice is w x h; fills background regions that no border pixel reaches.
void fill_slice(std::vector<std::uint8_t>& px, std::size_t w, std::size_t h)
{
    std::vector<std::uint8_t> reached(px.size(), 0);
    std::vector<std::size_t> stack;
    auto push = [&](std::size_t x, std::size_t y) {
        const std::size_t i = y * w + x;
        if (!px[i] && !reached[i]) {
            reached[i] = 1;
            stack.push_back(i);
        }
    };
    for (std::size_t x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (std::size_t y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const std::size_t x = i % w, y = i / w;
        if (x > 0) push(x - 1, y);
        if (x + 1 < w) push(x + 1, y);
        if (y > 0) push(x, y - 1);
        if (y + 1 < h) push(x, y + 1);
    }
    for (std::size_t i = 0; i < px.size(); ++i)
        if (!px[i] && !reached[i]) px[i] = 1;
}

std::vector<Offset> ball(int radius, bool three_d)
{
    std::vector<Offset> out;
    const int zr = three_d ? radius : 0;
    for (int dz = -zr; dz <= zr; ++dz)
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx)
                if (dx * dx + dy * dy + dz * dz <= radius * radius) out.push_back({dx, dy, dz});
    return out;
}

std::vector<std::uint8_t> dilate(const Dims3& d, const std::vector<std::uint8_t>& in, const std::vector<Offset>& se)
{
    std::vector<std::uint8_t> out(in.size(), 0);
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                if (!in[(z * d.ny + y) * d.nx + x]) continue;
                for (const auto& o : se) {
                    const auto px = static_cast<std::ptrdiff_t>(x) + o.dx;
                    const auto py = static_cast<std::ptrdiff_t>(y) + o.dy;
                    const auto pz = static_cast<std::ptrdiff_t>(z) + o.dz;
                    if (px < 0 || py < 0 || pz < 0 || px >= static_cast<std::ptrdiff_t>(d.nx) ||
                        py >= static_cast<std::ptrdiff_t>(d.ny) || pz >= static_cast<std::ptrdiff_t>(d.nz))
                        continue;
                    out[(static_cast<std::size_t>(pz) * d.ny + static_cast<std::size_t>(py)) * d.nx +
                        static_cast<std::size_t>(px)] = 1;
                }
            }
    return out;
}

std::vector<std::uint8_t> erode(const Dims3& d, const std::vector<std::uint8_t>& in, const std::vector<Offset>& se)
{
    std::vector<std::uint8_t> out(in.size(), 0);
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                if (!in[(z * d.ny + y) * d.nx + x]) continue;
                bool keep = true;
                for (const auto& o : se) {
                    const auto px = static_cast<std::ptrdiff_t>(x) + o.dx;
                    const auto py = static_cast<std::ptrdiff_t>(y) + o.dy;
                    const auto pz = static_cast<std::ptrdiff_t>(z) + o.dz;
                    if (px < 0 || py < 0 || pz < 0 || px >= static_cast<std::ptrdiff_t>(d.nx) ||
                        py >= static_cast<std::ptrdiff_t>(d.ny) || pz >= static_cast<std::ptrdiff_t>(d.nz) ||
                        !in[(static_cast<std::size_t>(pz) * d.ny + static_cast<std::size_t>(py)) * d.nx +
                            static_cast<std::size_t>(px)]) {
                        keep = false;
                        break;
                    }
                }
                out[(z * d.ny + y) * d.nx + x] = keep ? 1 : 0;
            }
    return out;
}

std::vector<std::uint8_t> apply_morph(const Dims3& d, const std::vector<std::uint8_t>& in, MorphOp op, int radius)
{
    if (radius < 0) throw Error(ErrorCode::argument, "morphology radius must be non-negative");
    if (radius == 0) return in;
    const auto se = ball(radius, d.nz > 1);
    switch (op) {
    case MorphOp::erode: return erode(d, in, se);
    case MorphOp::dilate: return dilate(d, in, se);
    case MorphOp::open: return dilate(d, erode(d, in, se), se);
    case MorphOp::close: return erode(d, dilate(d, in, se), se);
    }
    return in;
}

} // namespace

Components connected_components(const Mask3D& mask, Connectivity connectivity)
{
    return label_components(mask.dims, mask.data, connectivity);
}

Components connected_components(const Mask2D& mask, Connectivity connectivity)
{
    return label_components(dims_of(mask), mask.data, connectivity);
}

Mask3D largest_component(const Mask3D& mask, Connectivity connectivity)
{
    Mask3D out;
    out.dims = mask.dims;
    out.data = keep_largest(mask.dims, mask.data, connectivity);
    return out;
}

Mask2D largest_component(const Mask2D& mask, Connectivity connectivity)
{
    Mask2D out = mask;
    out.data = keep_largest(dims_of(mask), mask.data, connectivity);
    return out;
}

Mask3D fill_holes_slicewise(const Mask3D& mask, int axis)
{
    if (axis < 0 || axis > 2) throw Error(ErrorCode::argument, "fill_holes_slicewise axis must be 0, 1 or 2");
    const Dims3 d = mask.dims;
    Mask3D out = mask;
    // Slice coordinates (u, v) span the two axes other than `axis`.
    const int ua = axis == 0 ? 1 : 0;
    const int va = axis == 2 ? 1 : 2;
    const std::size_t w = d[ua], h = d[va];
    std::vector<std::uint8_t> px(w * h);
    auto voxel = [&](std::size_t s, std::size_t u, std::size_t v) -> std::uint8_t& {
        std::array<std::size_t, 3> c{};
        c[static_cast<std::size_t>(axis)] = s;
        c[static_cast<std::size_t>(ua)] = u;
        c[static_cast<std::size_t>(va)] = v;
        return out.at(c[0], c[1], c[2]);
    };
    for (std::size_t s = 0; s < d[axis]; ++s) {
        for (std::size_t v = 0; v < h; ++v)
            for (std::size_t u = 0; u < w; ++u) px[v * w + u] = voxel(s, u, v) ? 1 : 0;
        fill_slice(px, w, h);
        for (std::size_t v = 0; v < h; ++v)
            for (std::size_t u = 0; u < w; ++u) voxel(s, u, v) = px[v * w + u];
    }
    return out;
}

Mask2D fill_holes(const Mask2D& mask)
{
    Mask2D out = mask;
    for (auto& v : out.data) v = v ? 1 : 0;
    if (!out.empty()) fill_slice(out.data, out.width, out.height);
    return out;
}

Mask3D morph(const Mask3D& mask, MorphOp op, int radius)
{
    Mask3D out;
    out.dims = mask.dims;
    out.data = apply_morph(mask.dims, mask.data, op, radius);
    return out;
}

Mask2D morph(const Mask2D& mask, MorphOp op, int radius)
{
    Mask2D out = mask;
    out.data = apply_morph(dims_of(mask), mask.data, op, radius);
    return out;
}

} // namespace ctxr
