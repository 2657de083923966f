#include "ctxr/metrics.hpp"

#include "ctxr/error.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace ctxr {

namespace {

void require_same_dims(const Mask2D& a, const Mask2D& b)
{
    if (a.width != b.width || a.height != b.height)
        throw Error(ErrorCode::argument, "mask dims differ: " + std::to_string(a.width) + "x" +
                                             std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                             std::to_string(b.height));
}

std::string fmt_real(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string opt_real(const std::optional<double>& v)
{
    return v ? fmt_real(*v) : std::string{};
}

nlohmann::json opt_json(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace

Overlap overlap(const Mask2D& a, const Mask2D& b)
{
    require_same_dims(a, b);
    Overlap o;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool pa = a.data[i] != 0;
        const bool pb = b.data[i] != 0;
        o.a += pa;
        o.b += pb;
        o.intersection += pa && pb;
    }
    return o;
}

IouDice iou_dice(const Mask2D& a, const Mask2D& b)
{
    const Overlap o = overlap(a, b);
    IouDice r;
    if (o.a + o.b == 0) return r;
    r.iou = static_cast<double>(o.intersection) / static_cast<double>(o.union_size());
    r.dice = 2.0 * static_cast<double>(o.intersection) / static_cast<double>(o.a + o.b);
    return r;
}

std::vector<std::pair<std::size_t, std::size_t>> boundary_pixels(const Mask2D& m)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    auto bg = [&](std::size_t x, std::size_t y, int dx, int dy) {
        if ((dx < 0 && x == 0) || (dy < 0 && y == 0) || (dx > 0 && x + 1 == m.width) || (dy > 0 && y + 1 == m.height))
            return true;
        return m.at(x + dx, y + dy) == 0;
    };
    for (std::size_t y = 0; y < m.height; ++y)
        for (std::size_t x = 0; x < m.width; ++x)
            if (m.at(x, y) && (bg(x, y, -1, 0) || bg(x, y, 1, 0) || bg(x, y, 0, -1) || bg(x, y, 0, 1)))
                out.emplace_back(x, y);
    return out;
}

std::vector<std::uint64_t> squared_distance_transform(const Mask2D& m)
{
    constexpr std::uint64_t inf = std::numeric_limits<std::uint64_t>::max();
    const std::size_t w = m.width;
    const std::size_t h = m.height;
    // Column pass: squared distance to the nearest set pixel in the same column.
    std::vector<std::uint64_t> col(w * h, inf);
    for (std::size_t x = 0; x < w; ++x) {
        std::optional<std::size_t> last;
        for (std::size_t y = 0; y < h; ++y) {
            if (m.at(x, y)) last = y;
            if (last) col[y * w + x] = (y - *last) * (y - *last);
        }
        last.reset();
        for (std::size_t y = h; y-- > 0;) {
            if (m.at(x, y)) last = y;
            if (last) col[y * w + x] = std::min(col[y * w + x], (*last - y) * (*last - y));
        }
    }
    // Row pass: lower envelope of parabolas x -> (x - v)^2 + f(v).
    std::vector<std::uint64_t> out(w * h, inf);
    std::vector<std::int64_t> v(w);
    std::vector<double> z(w + 1);
    for (std::size_t y = 0; y < h; ++y) {
        const std::uint64_t* f = &col[y * w];
        std::size_t k = 0;
        bool any = false;
        for (std::size_t q = 0; q < w; ++q) {
            if (f[q] == inf) continue;
            const auto qi = static_cast<std::int64_t>(q);
            const auto fq = static_cast<double>(f[q]);
            if (!any) {
                any = true;
                k = 0;
                v[0] = qi;
                z[0] = -std::numeric_limits<double>::infinity();
                z[1] = std::numeric_limits<double>::infinity();
                continue;
            }
            double s = 0.0;
            while (true) {
                const std::int64_t vk = v[k];
                s = ((fq + static_cast<double>(qi * qi)) - (static_cast<double>(f[vk]) + static_cast<double>(vk * vk))) /
                    static_cast<double>(2 * (qi - vk));
                if (s > z[k]) break;
                --k;  // z[0] is -inf, so this stops at k == 0
            }
            ++k;
            v[k] = qi;
            z[k] = s;
            z[k + 1] = std::numeric_limits<double>::infinity();
        }
        if (!any) continue;
        k = 0;
        for (std::size_t q = 0; q < w; ++q) {
            while (z[k + 1] < static_cast<double>(q)) ++k;
            const std::int64_t d = static_cast<std::int64_t>(q) - v[k];
            out[y * w + q] = static_cast<std::uint64_t>(d * d) + f[v[k]];
        }
    }
    return out;
}

std::optional<double> hausdorff(const Mask2D& a, const Mask2D& b)
{
    require_same_dims(a, b);
    const auto ba = boundary_pixels(a);
    const auto bb = boundary_pixels(b);
    if (ba.empty() || bb.empty()) return std::nullopt;
    auto as_mask = [&](const std::vector<std::pair<std::size_t, std::size_t>>& pts) {
        Mask2D m(a.width, a.height);
        for (auto [x, y] : pts) m.at(x, y) = 1;
        return m;
    };
    const auto da = squared_distance_transform(as_mask(ba));
    const auto db = squared_distance_transform(as_mask(bb));
    std::uint64_t worst = 0;
    for (auto [x, y] : ba) worst = std::max(worst, db[y * a.width + x]);
    for (auto [x, y] : bb) worst = std::max(worst, da[y * a.width + x]);
    return std::sqrt(static_cast<double>(worst));
}

SegScore evaluate_masksets(const MaskSet2D& pred, const MaskSet2D& gt)
{
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw Error(ErrorCode::argument, "prediction and ground truth dims differ");
    std::vector<std::string> missing_pred;
    std::vector<std::string> extra_pred;
    for (const auto& e : gt.entries())
        if (!pred.contains(e.name)) missing_pred.push_back(e.name);
    for (const auto& e : pred.entries())
        if (!gt.contains(e.name)) extra_pred.push_back(e.name);
    if (!missing_pred.empty() || !extra_pred.empty()) {
        std::string msg = "taxonomy mismatch;";
        auto list = [&](const char* label, const std::vector<std::string>& names) {
            if (names.empty()) return;
            msg += std::string(" ") + label + ":";
            for (const auto& n : names) msg += " " + n;
            msg += ";";
        };
        list("missing from prediction", missing_pred);
        list("missing from ground truth", extra_pred);
        throw Error(ErrorCode::taxonomy_mismatch, msg);
    }

    SegScore s;
    double sum_iou = 0.0, sum_dice = 0.0, sum_hd = 0.0;
    std::size_t n_overlap = 0, n_hd = 0;
    for (const auto& e : gt.entries()) {
        const Mask2D& p = *pred.find(e.name);
        ClassScore c{e.name, {}, {}, {}};
        const IouDice od = iou_dice(p, e.mask);
        c.iou = od.iou;
        c.dice = od.dice;
        c.hausdorff = hausdorff(p, e.mask);
        if (c.iou) {
            sum_iou += *c.iou;
            sum_dice += *c.dice;
            ++n_overlap;
        } else {
            s.undefined_overlap.push_back(e.name);
        }
        if (c.hausdorff) {
            sum_hd += *c.hausdorff;
            ++n_hd;
        } else {
            s.undefined_hausdorff.push_back(e.name);
        }
        s.classes.push_back(std::move(c));
    }
    if (n_overlap) {
        s.mean_iou = sum_iou / static_cast<double>(n_overlap);
        s.mean_dice = sum_dice / static_cast<double>(n_overlap);
    }
    if (n_hd) s.mean_hausdorff = sum_hd / static_cast<double>(n_hd);
    return s;
}

std::string segscore_to_json(const SegScore& s)
{
    nlohmann::json j;
    j["mean_iou"] = opt_json(s.mean_iou);
    j["mean_dice"] = opt_json(s.mean_dice);
    j["mean_hausdorff"] = opt_json(s.mean_hausdorff);
    j["undefined_overlap"] = s.undefined_overlap;
    j["undefined_hausdorff"] = s.undefined_hausdorff;
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : s.classes)
        classes.push_back({{"name", c.name},
                           {"iou", opt_json(c.iou)},
                           {"dice", opt_json(c.dice)},
                           {"hausdorff", opt_json(c.hausdorff)}});
    j["classes"] = std::move(classes);
    return j.dump(2);
}

std::string segscore_to_csv(const SegScore& s)
{
    std::string out = "class,iou,dice,hausdorff\n";
    for (const auto& c : s.classes)
        out += c.name + "," + opt_real(c.iou) + "," + opt_real(c.dice) + "," + opt_real(c.hausdorff) + "\n";
    return out;
}

namespace {

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x, Eigen::VectorXd& mean)
{
    if (x.rows() < 2) throw Error(ErrorCode::degenerate_sample, "covariance needs at least 2 feature rows");
    mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd c = x.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(x.rows() - 1);
    return 0.5 * (cov + cov.transpose());
}

// Eigenvalues of a symmetric matrix with PSD tolerance relative to its scale.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> psd_eigen(const Eigen::MatrixXd& m, const char* what)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::numeric_domain, std::string(what) + ": eigensolver failed");
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-8 * scale)
        throw Error(ErrorCode::numeric_domain, std::string(what) + " is not positive semidefinite");
    return es;
}

} // namespace

FeatureStats FeatureStats::from_features(const Eigen::MatrixXd& real, const Eigen::MatrixXd& projected)
{
    if (real.cols() != projected.cols())
        throw Error(ErrorCode::argument, "feature matrices have different widths");
    FeatureStats s;
    s.sigma = sample_covariance(real, s.mu);
    s.sigma_w = sample_covariance(projected, s.mu_w);
    return s;
}

void FeatureStats::validate() const
{
    const auto n = mu.size();
    if (n == 0 || mu_w.size() != n || sigma.rows() != n || sigma.cols() != n || sigma_w.rows() != n ||
        sigma_w.cols() != n)
        throw Error(ErrorCode::argument, "feature statistics have inconsistent dimensions");
    if (!sigma.allFinite() || !sigma_w.allFinite() || !mu.allFinite() || !mu_w.allFinite())
        throw Error(ErrorCode::numeric_domain, "feature statistics are not finite");
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9 ||
        (sigma_w - sigma_w.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw Error(ErrorCode::numeric_domain, "covariance is not symmetric");
}

double frechet_distance(const FeatureStats& s)
{
    s.validate();
    const auto es = psd_eigen(s.sigma, "Sigma");
    psd_eigen(s.sigma_w, "Sigma_w");
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd sqrt_sigma = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    Eigen::MatrixXd m = sqrt_sigma * s.sigma_w * sqrt_sigma;
    m = 0.5 * (m + m.transpose());
    const auto em = psd_eigen(m, "Sigma^1/2 Sigma_w Sigma^1/2");
    const double tr_sqrt = em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double d = (s.mu - s.mu_w).squaredNorm() + s.sigma.trace() + s.sigma_w.trace() - 2.0 * tr_sqrt;
    if (d < -1e-6) throw Error(ErrorCode::numeric_domain, "negative Frechet distance " + fmt_real(d));
    return std::max(d, 0.0);
}

namespace {

struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double var = 0.0;  // sample variance
};

Moments moments(std::span<const double> x)
{
    Moments m;
    m.n = static_cast<double>(x.size());
    for (double v : x) {
        if (!std::isfinite(v)) throw Error(ErrorCode::argument, "t-test values must be finite");
        m.mean += v;
    }
    m.mean /= m.n;
    for (double v : x) m.var += (v - m.mean) * (v - m.mean);
    m.var /= (m.n - 1.0);
    return m;
}

} // namespace

TTestResult t_test(std::span<const double> pos, std::span<const double> neg, TTestKind kind)
{
    if (pos.size() < 2 || neg.size() < 2)
        throw Error(ErrorCode::degenerate_sample, "t-test needs at least 2 samples per group");
    const Moments a = moments(pos);
    const Moments b = moments(neg);
    TTestResult r;
    double se2 = 0.0;
    if (kind == TTestKind::welch) {
        const double va = a.var / a.n;
        const double vb = b.var / b.n;
        se2 = va + vb;
        if (se2 > 0.0) r.df = se2 * se2 / (va * va / (a.n - 1.0) + vb * vb / (b.n - 1.0));
    } else {
        r.df = a.n + b.n - 2.0;
        const double pooled = ((a.n - 1.0) * a.var + (b.n - 1.0) * b.var) / r.df;
        se2 = pooled * (1.0 / a.n + 1.0 / b.n);
    }
    if (!(se2 > 0.0)) throw Error(ErrorCode::degenerate_sample, "t-test with zero variance in both groups");
    r.t = (a.mean - b.mean) / std::sqrt(se2);
    const boost::math::students_t dist(r.df);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
    return r;
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels)
{
    if (scores.size() != labels.size()) throw Error(ErrorCode::argument, "scores and labels differ in length");
    std::uint64_t p = 0, n = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw Error(ErrorCode::argument, "scores must be finite");
        if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::argument, "labels must be 0 or 1");
        (labels[i] ? p : n) += 1;
    }
    if (p == 0 || n == 0) throw Error(ErrorCode::undefined_metric, "ROC needs both positive and negative labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return scores[i] > scores[j]; });

    RocResult r;
    r.curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::uint64_t tp = 0, fp = 0;
    unsigned __int128 twice_area = 0;  // sum of dFP * (TP_prev + TP_cur)
    for (std::size_t i = 0; i < order.size();) {
        const double thr = scores[order[i]];
        const std::uint64_t tp0 = tp, fp0 = fp;
        for (; i < order.size() && scores[order[i]] == thr; ++i) (labels[order[i]] ? tp : fp) += 1;
        twice_area += static_cast<unsigned __int128>(fp - fp0) * (tp0 + tp);
        r.curve.push_back({thr, static_cast<double>(fp) / static_cast<double>(n),
                           static_cast<double>(tp) / static_cast<double>(p)});
    }
    // Both operands are exact integers below 2^53 for any realistic cohort, so the quotient is correctly rounded.
    r.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
    return r;
}

std::string roc_to_csv(const RocResult& roc)
{
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& pt : roc.curve)
        out += (std::isinf(pt.threshold) ? std::string("inf") : fmt_real(pt.threshold)) + "," + fmt_real(pt.fpr) +
               "," + fmt_real(pt.tpr) + "\n";
    return out;
}

std::size_t CohortTable::n_pos() const
{
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](auto& r) { return r.label == 1; }));
}

std::size_t CohortTable::n_neg() const
{
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](auto& r) { return r.label == 0; }));
}

void CohortTable::validate() const
{
    for (const auto& r : rows) {
        if (r.label != 0 && r.label != 1)
            throw Error(ErrorCode::argument, "cohort row '" + r.id + "' has a non-binary label");
        if (!std::isfinite(r.value)) throw Error(ErrorCode::argument, "cohort row '" + r.id + "' has a non-finite value");
    }
}

} // namespace ctxr
