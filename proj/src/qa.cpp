#include "ctxr/qa.hpp"

#include "ctxr/biomarkers.hpp"
#include "ctxr/error.hpp"
#include "ctxr/imgops.hpp"
#include "ctxr/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

using nlohmann::json;

namespace ctxr {

namespace {

struct Sample {
    double area = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    std::size_t components = 0;
};

Sample measure(const Mask2D& m)
{
    Sample s;
    const Point2 c = centroid(m);
    s.area = static_cast<double>(count_foreground(m)) / static_cast<double>(m.width * m.height);
    s.cx = c.x / static_cast<double>(m.width);
    s.cy = c.y / static_cast<double>(m.height);
    s.components = connected_components(m, Connectivity::full).count();
    return s;
}

// Mean and sample std, summed in sorted order so the result does not depend
// on cohort order. Identical values give exactly that value and std 0.
std::pair<double, double> mean_std(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    if (v.front() == v.back()) return {v.front(), 0.0};
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

double z_score(double value, double mean, double std)
{
    if (std > 0.0) return std::abs(value - mean) / std;
    return value == mean ? 0.0 : std::numeric_limits<double>::infinity();
}

json opt_json(const std::optional<double>& v)
{
    if (!v) return nullptr;
    if (std::isinf(*v)) return "inf";
    return *v;
}

std::optional<double> opt_from(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

} // namespace

ClassStats compute_class_stats(const std::vector<MaskSet2D>& cohort)
{
    if (cohort.size() < 2)
        throw Error(ErrorCode::insufficient_cohort,
                    "class statistics need at least 2 mask sets, got " + std::to_string(cohort.size()));
    ClassStats stats;
    stats.view = cohort.front().view();
    stats.cohort_size = cohort.size();
    std::map<std::string, std::vector<Sample>> samples;
    for (const auto& ms : cohort) {
        if (ms.view() != stats.view) throw Error(ErrorCode::view_mismatch, "cohort mixes frontal and lateral mask sets");
        for (const auto& e : ms.entries()) {
            auto& list = samples[e.name];
            if (ms.find_nonempty(e.name)) list.push_back(measure(e.mask));
        }
    }
    for (auto& [name, list] : samples) {
        ClassMoments m;
        m.present = list.size();
        m.presence = static_cast<double>(list.size()) / static_cast<double>(cohort.size());
        if (list.size() >= 2) {
            std::vector<double> a, x, y, c;
            for (const auto& s : list) {
                a.push_back(s.area);
                x.push_back(s.cx);
                y.push_back(s.cy);
                c.push_back(static_cast<double>(s.components));
            }
            std::tie(m.area_mean, m.area_std) = mean_std(a);
            std::tie(m.cx_mean, m.cx_std) = mean_std(x);
            std::tie(m.cy_mean, m.cy_std) = mean_std(y);
            m.components_mean = mean_std(c).first;
        }
        stats.classes.emplace(name, m);
    }
    return stats;
}

std::string class_stats_to_json(const ClassStats& stats)
{
    json j;
    j["view"] = to_string(stats.view);
    j["cohort_size"] = stats.cohort_size;
    json classes = json::object();
    for (const auto& [name, m] : stats.classes)
        classes[name] = {{"present", m.present},
                         {"presence", m.presence},
                         {"area_mean", opt_json(m.area_mean)},
                         {"area_std", opt_json(m.area_std)},
                         {"cx_mean", opt_json(m.cx_mean)},
                         {"cx_std", opt_json(m.cx_std)},
                         {"cy_mean", opt_json(m.cy_mean)},
                         {"cy_std", opt_json(m.cy_std)},
                         {"components_mean", opt_json(m.components_mean)}};
    j["classes"] = std::move(classes);
    return j.dump(2);
}

ClassStats class_stats_from_json(const std::string& text)
{
    try {
        const json j = json::parse(text);
        ClassStats s;
        s.view = parse_view(j.at("view").get<std::string>());
        s.cohort_size = j.at("cohort_size").get<std::size_t>();
        for (const auto& [name, c] : j.at("classes").items()) {
            ClassMoments m;
            m.present = c.at("present").get<std::size_t>();
            m.presence = c.at("presence").get<double>();
            m.area_mean = opt_from(c, "area_mean");
            m.area_std = opt_from(c, "area_std");
            m.cx_mean = opt_from(c, "cx_mean");
            m.cx_std = opt_from(c, "cx_std");
            m.cy_mean = opt_from(c, "cy_mean");
            m.cy_std = opt_from(c, "cy_std");
            m.components_mean = opt_from(c, "components_mean");
            s.classes.emplace(name, m);
        }
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, std::string("class stats: ") + e.what());
    }
}

void QaConfig::validate() const
{
    if (!(z_max > 0.0)) throw Error(ErrorCode::config, "qa z_max must be positive");
    if (min_rib_pairs < 0) throw Error(ErrorCode::config, "qa min_rib_pairs must be non-negative");
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::warn: return "warn";
    case Verdict::fail: return "fail";
    }
    return "fail";
}

std::size_t count_rib_pairs(const MaskSet2D& masks)
{
    std::set<int> left, right;
    for (const auto& e : masks.entries()) {
        const auto rib = parse_posterior_rib(e.name);
        if (!rib || !masks.find_nonempty(e.name)) continue;
        (rib->side == "left" ? left : right).insert(rib->index);
    }
    return std::min(left.size(), right.size());
}

PlausibilityReport plausibility_check(const MaskSet2D& masks, const ClassStats& stats, const QaConfig& config)
{
    config.validate();
    if (masks.view() != stats.view)
        throw Error(ErrorCode::view_mismatch, "mask set view " + to_string(masks.view()) + " differs from statistics view " +
                                                  to_string(stats.view));
    PlausibilityReport r;
    r.image_id = masks.source_id();
    std::set<std::string> class_reasons;
    bool class_fail = false;
    bool class_warn = false;
    for (const auto& e : masks.entries()) {
        if (!masks.find_nonempty(e.name)) continue;
        const Sample s = measure(e.mask);
        ClassCheck c;
        c.name = e.name;
        c.components = s.components;
        const auto it = stats.classes.find(e.name);
        if (it != stats.classes.end() && it->second.area_mean) {
            const ClassMoments& m = it->second;
            c.z_area = z_score(s.area, *m.area_mean, *m.area_std);
            c.z_cx = z_score(s.cx, *m.cx_mean, *m.cx_std);
            c.z_cy = z_score(s.cy, *m.cy_mean, *m.cy_std);
            if (*c.z_area > config.z_max) c.reasons.push_back("area-z");
            if (*c.z_cx > config.z_max || *c.z_cy > config.z_max) c.reasons.push_back("centroid-z");
            if (!c.reasons.empty()) c.verdict = Verdict::fail;
            if (std::lround(*m.components_mean) == 1 && s.components > 1) {
                c.reasons.push_back("components");
                if (c.verdict == Verdict::pass) c.verdict = Verdict::warn;
            }
        }
        class_fail |= c.verdict == Verdict::fail;
        class_warn |= c.verdict != Verdict::pass;
        for (const auto& reason : c.reasons)
            if (reason != "components") class_reasons.insert(reason);
        r.classes.push_back(std::move(c));
    }

    r.rib_pairs = count_rib_pairs(masks);
    if (r.rib_pairs < static_cast<std::size_t>(config.min_rib_pairs)) r.failed_rules.push_back("rib_count");
    if (config.fail_on_class_deviation && class_fail) r.failed_rules.push_back("class_deviation");

    r.reasons = r.failed_rules;
    r.reasons.insert(r.reasons.end(), class_reasons.begin(), class_reasons.end());
    std::sort(r.reasons.begin(), r.reasons.end());
    if (!r.failed_rules.empty())
        r.verdict = Verdict::fail;
    else if (class_warn)
        r.verdict = Verdict::warn;
    return r;
}

std::string report_to_json(const PlausibilityReport& r)
{
    json j;
    j["image_id"] = r.image_id;
    j["verdict"] = to_string(r.verdict);
    j["rib_pairs"] = r.rib_pairs;
    j["failed_rules"] = r.failed_rules;
    j["reasons"] = r.reasons;
    json classes = json::array();
    for (const auto& c : r.classes)
        classes.push_back({{"name", c.name},
                           {"verdict", to_string(c.verdict)},
                           {"z_area", opt_json(c.z_area)},
                           {"z_cx", opt_json(c.z_cx)},
                           {"z_cy", opt_json(c.z_cy)},
                           {"components", c.components},
                           {"reasons", c.reasons}});
    j["classes"] = std::move(classes);
    return j.dump(2);
}

std::string report_csv_header()
{
    return "id,verdict,rib_pairs,reasons,failed_classes";
}

std::string report_csv_row(const PlausibilityReport& r)
{
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ";") + x;
        return s;
    };
    std::vector<std::string> failed;
    for (const auto& c : r.classes)
        if (c.verdict == Verdict::fail) failed.push_back(c.name);
    return r.image_id + "," + to_string(r.verdict) + "," + std::to_string(r.rib_pairs) + "," + join(r.reasons) + "," +
           join(failed);
}

} // namespace ctxr
