#include "ctxr/pipeline.hpp"

#include "ctxr/biomarkers.hpp"
#include "ctxr/error.hpp"
#include "ctxr/phantom.hpp"
#include "ctxr/png_io.hpp"
#include "ctxr/volume_io.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fnmatch.h>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef CTXR_VERSION
#define CTXR_VERSION "0.0.0"
#endif

namespace ctxr {

std::string_view tool_version()
{
    return CTXR_VERSION;
}

ViewSelection parse_view_selection(const std::string& name)
{
    if (name == "frontal") return ViewSelection::frontal;
    if (name == "lateral") return ViewSelection::lateral;
    if (name == "both") return ViewSelection::both;
    throw Error(ErrorCode::argument, "unknown view '" + name + "' (expected frontal, lateral or both)");
}

std::vector<View> views_of(ViewSelection s)
{
    switch (s) {
    case ViewSelection::frontal: return {View::frontal};
    case ViewSelection::lateral: return {View::lateral};
    case ViewSelection::both: break;
    }
    return {View::frontal, View::lateral};
}

namespace {

std::string view_selection_name(ViewSelection s)
{
    return s == ViewSelection::frontal ? "frontal" : s == ViewSelection::lateral ? "lateral" : "both";
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw Error(ErrorCode::config, where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw Error(ErrorCode::config, "unknown config key '" + where + "." + key + "'");
    }
}

template <typename T>
void read_opt(const json& j, const char* key, T& target)
{
    if (j.contains(key)) target = j.at(key).get<T>();
}

double read_real_or_inf(const json& j)
{
    if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity"))
        return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

json real_or_inf(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string fmt_real(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

std::string rel(const fs::path& p, const fs::path& root)
{
    return p.lexically_relative(root).generic_string();
}

std::string archive_stem(const fs::path& p)
{
    const std::string name = p.filename().string();
    const std::string ext = ".masks.json";
    if (name.size() > ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0)
        return name.substr(0, name.size() - ext.size());
    return p.stem().string();
}

// Runs fn per item, capturing library errors and I/O failures per item.
std::vector<ItemResult> run_items(const std::vector<std::string>& inputs, int jobs,
                                  const std::function<void(std::size_t, ItemResult&)>& fn)
{
    std::vector<ItemResult> results(inputs.size());
    parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        ItemResult& r = results[i];
        r.input = inputs[i];
        try {
            fn(i, r);
        } catch (const Error& e) {
            r.ok = false;
            r.error_code = std::string(to_string(e.code()));
            r.message = e.what();
        } catch (const std::exception& e) {
            r.ok = false;
            r.error_code = "io";
            r.message = e.what();
        }
    });
    return results;
}

} // namespace

void PipelineConfig::validate() const
{
    projection.validate();
    regions.validate();
    qa.validate();
    if (jobs < 1) throw Error(ErrorCode::config, "jobs must be at least 1");
}

std::string PipelineConfig::canonical_json() const
{
    const auto& p = projection;
    json j;
    j["projection"] = {{"body_weight", p.body_weight},
                       {"bone_weight", p.bone_weight},
                       {"body_threshold", p.body_threshold},
                       {"output_size", {p.output_size.width, p.output_size.height}},
                       {"equalize_frontal", p.equalize_frontal},
                       {"equalize_lateral", p.equalize_lateral},
                       {"clahe_tiles", {p.clahe_tiles_x, p.clahe_tiles_y}},
                       {"clahe_clip_limit", real_or_inf(p.clahe_clip_limit)},
                       {"window", {p.window.lo, p.window.hi}},
                       {"ght",
                        {{"nu", real_or_inf(p.ght.nu)},
                         {"tau", p.ght.tau},
                         {"kappa", p.ght.kappa},
                         {"omega", p.ght.omega}}}};
    const auto& r = regions;
    j["regions"] = {{"bifurcation_offset_rows", r.bifurcation_offset_rows},
                    {"lung_zone_fractions", r.lung_zone_fractions},
                    {"clavicle_landmark", r.clavicle_landmark == ClavicleLandmark::inferior ? "inferior" : "superior"},
                    {"split_aorta", r.split_aorta},
                    {"mediastinum_t4", r.mediastinum_t4},
                    {"mediastinum_ant_post", r.mediastinum_ant_post},
                    {"lung_zones", r.lung_zones},
                    {"tracheal_bifurcation", r.tracheal_bifurcation},
                    {"hemidiaphragm", r.hemidiaphragm}};
    j["qa"] = {{"z_max", qa.z_max},
               {"min_rib_pairs", qa.min_rib_pairs},
               {"fail_on_class_deviation", qa.fail_on_class_deviation}};
    j["cohort"] = {{"t_test", t_test == TTestKind::welch ? "welch" : "student"}};
    j["views"] = view_selection_name(views);
    j["write_masks"] = write_masks;
    j["derive_on_project"] = derive_on_project;
    return j.dump();
}

std::string PipelineConfig::hash() const
{
    return sha256_hex(canonical_json());
}

PipelineConfig parse_pipeline_config(const std::string& text)
{
    PipelineConfig c;
    try {
        const json j = json::parse(text);
        check_keys(j, "config",
                   {"projection", "regions", "qa", "cohort", "views", "write_masks", "derive_on_project", "inputs",
                    "out", "jobs"});
        if (j.contains("projection")) {
            const json& p = j.at("projection");
            check_keys(p, "projection",
                       {"body_weight", "bone_weight", "body_threshold", "output_size", "equalize_frontal",
                        "equalize_lateral", "clahe_tiles", "clahe_clip_limit", "window", "ght"});
            auto& pc = c.projection;
            read_opt(p, "body_weight", pc.body_weight);
            read_opt(p, "bone_weight", pc.bone_weight);
            read_opt(p, "body_threshold", pc.body_threshold);
            if (p.contains("output_size"))
                pc.output_size = {p.at("output_size").at(0).get<std::size_t>(),
                                  p.at("output_size").at(1).get<std::size_t>()};
            read_opt(p, "equalize_frontal", pc.equalize_frontal);
            read_opt(p, "equalize_lateral", pc.equalize_lateral);
            if (p.contains("clahe_tiles")) {
                pc.clahe_tiles_x = p.at("clahe_tiles").at(0).get<std::size_t>();
                pc.clahe_tiles_y = p.at("clahe_tiles").at(1).get<std::size_t>();
            }
            if (p.contains("clahe_clip_limit")) pc.clahe_clip_limit = read_real_or_inf(p.at("clahe_clip_limit"));
            if (p.contains("window"))
                pc.window = {p.at("window").at(0).get<double>(), p.at("window").at(1).get<double>()};
            if (p.contains("ght")) {
                const json& g = p.at("ght");
                check_keys(g, "projection.ght", {"nu", "tau", "kappa", "omega"});
                if (g.contains("nu")) pc.ght.nu = read_real_or_inf(g.at("nu"));
                read_opt(g, "tau", pc.ght.tau);
                read_opt(g, "kappa", pc.ght.kappa);
                read_opt(g, "omega", pc.ght.omega);
            }
        }
        if (j.contains("regions")) {
            const json& r = j.at("regions");
            check_keys(r, "regions",
                       {"bifurcation_offset_rows", "lung_zone_fractions", "clavicle_landmark", "split_aorta",
                        "mediastinum_t4", "mediastinum_ant_post", "lung_zones", "tracheal_bifurcation",
                        "hemidiaphragm"});
            auto& rc = c.regions;
            read_opt(r, "bifurcation_offset_rows", rc.bifurcation_offset_rows);
            read_opt(r, "lung_zone_fractions", rc.lung_zone_fractions);
            if (r.contains("clavicle_landmark")) {
                const auto v = r.at("clavicle_landmark").get<std::string>();
                if (v != "inferior" && v != "superior")
                    throw Error(ErrorCode::config, "regions.clavicle_landmark must be inferior or superior");
                rc.clavicle_landmark = v == "inferior" ? ClavicleLandmark::inferior : ClavicleLandmark::superior;
            }
            read_opt(r, "split_aorta", rc.split_aorta);
            read_opt(r, "mediastinum_t4", rc.mediastinum_t4);
            read_opt(r, "mediastinum_ant_post", rc.mediastinum_ant_post);
            read_opt(r, "lung_zones", rc.lung_zones);
            read_opt(r, "tracheal_bifurcation", rc.tracheal_bifurcation);
            read_opt(r, "hemidiaphragm", rc.hemidiaphragm);
        }
        if (j.contains("qa")) {
            const json& q = j.at("qa");
            check_keys(q, "qa", {"z_max", "min_rib_pairs", "fail_on_class_deviation"});
            read_opt(q, "z_max", c.qa.z_max);
            read_opt(q, "min_rib_pairs", c.qa.min_rib_pairs);
            read_opt(q, "fail_on_class_deviation", c.qa.fail_on_class_deviation);
        }
        if (j.contains("cohort")) {
            const json& h = j.at("cohort");
            check_keys(h, "cohort", {"t_test"});
            if (h.contains("t_test")) {
                const auto v = h.at("t_test").get<std::string>();
                if (v != "welch" && v != "student") throw Error(ErrorCode::config, "cohort.t_test must be welch or student");
                c.t_test = v == "welch" ? TTestKind::welch : TTestKind::student;
            }
        }
        if (j.contains("views")) c.views = parse_view_selection(j.at("views").get<std::string>());
        read_opt(j, "write_masks", c.write_masks);
        read_opt(j, "derive_on_project", c.derive_on_project);
        read_opt(j, "inputs", c.inputs);
        read_opt(j, "out", c.out);
        read_opt(j, "jobs", c.jobs);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("invalid config: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig load_pipeline_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_pipeline_config(ss.str());
}

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::io, "SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns)
{
    std::vector<std::string> out;
    for (const auto& p : patterns) {
        const fs::path path(p);
        const std::string name = path.filename().string();
        if (name.find_first_of("*?[") == std::string::npos) {
            out.push_back(p);
            continue;
        }
        const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
        std::vector<std::string> matches;
        std::error_code ec;
        for (const auto& entry : fs::directory_iterator(dir, ec))
            if (entry.is_regular_file() && fnmatch(name.c_str(), entry.path().filename().c_str(), 0) == 0)
                matches.push_back((path.has_parent_path() ? dir / entry.path().filename() : entry.path().filename())
                                      .string());
        std::sort(matches.begin(), matches.end());
        out.insert(out.end(), matches.begin(), matches.end());
    }
    return out;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

bool RunResult::ok() const
{
    return failures() == 0;
}

std::size_t RunResult::failures() const
{
    return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](auto& i) { return !i.ok; }));
}

void write_manifest(const RunResult& run, const PipelineConfig& config, const fs::path& out)
{
    json j;
    j["tool"] = "ctxr";
    j["version"] = std::string(tool_version());
    j["command"] = run.command;
    j["config_hash"] = config.hash();
    j["config"] = json::parse(config.canonical_json());
    json items = json::array();
    for (const auto& i : run.items) {
        json item{{"input", i.input}, {"status", i.ok ? "ok" : "error"}, {"outputs", i.outputs}};
        if (!i.ok) {
            item["error"] = i.error_code;
            item["message"] = i.message;
        }
        if (!i.warnings.empty()) item["warnings"] = i.warnings;
        items.push_back(std::move(item));
    }
    j["items"] = std::move(items);
    j["outputs"] = run.outputs;
    j["summary"] = {{"total", run.items.size()}, {"failed", run.failures()}};
    write_text(out / "manifest.json", j.dump(2) + "\n");
}

RunResult cmd_project(const PipelineConfig& config, const std::vector<std::string>& volumes, const fs::path& out)
{
    config.validate();
    fs::create_directories(out);
    RunResult run{"project", {}, {}};
    run.items = run_items(volumes, config.jobs, [&](std::size_t i, ItemResult& r) {
        const fs::path in(volumes[i]);
        const Volume volume = load_volume(in);
        const std::string stem = volume_stem(in);
        std::optional<LabelVolume> labels;
        if (config.write_masks) {
            const fs::path lp = labels_path_for(in);
            if (fs::exists(lp)) {
                labels = load_labels(lp);
                if (labels->grid().dims != volume.grid.dims)
                    throw Error(ErrorCode::format, "labels '" + lp.string() + "' do not match the volume grid");
            } else {
                r.warnings.push_back("no labels next to volume; masks not projected");
            }
        }
        for (View view : views_of(config.views)) {
            const std::string base = stem + "_" + to_string(view);
            const Projection p = compose_drr(volume, view, config.projection, stem);
            const fs::path png = out / (base + ".png");
            write_png_gray8(p.image, png);
            r.outputs.push_back(rel(png, out));
            if (!labels) continue;
            MaskSet2D masks = project_masks(*labels, view, config.projection.output_size, stem);
            if (config.derive_on_project) {
                RegionResult derived = derive_regions(masks, config.regions);
                masks = std::move(derived.masks);
                for (auto& w : derived.warnings) r.warnings.push_back(to_string(view) + ": " + w);
            }
            const fs::path archive = out / (base + ".masks.json");
            save_mask_archive(masks, archive);
            r.outputs.push_back(rel(archive, out));
        }
    });
    write_manifest(run, config, out);
    return run;
}

RunResult cmd_derive_regions(const PipelineConfig& config, const std::vector<std::string>& archives, const fs::path& out)
{
    config.validate();
    fs::create_directories(out);
    RunResult run{"derive-regions", {}, {}};
    run.items = run_items(archives, config.jobs, [&](std::size_t i, ItemResult& r) {
        const fs::path in(archives[i]);
        const MaskSet2D masks = load_mask_archive(in);
        RegionResult derived = derive_regions(masks, config.regions);
        r.warnings = std::move(derived.warnings);
        const fs::path target = out / in.filename();
        if (fs::exists(target) && fs::equivalent(target, in))
            throw Error(ErrorCode::argument, "output would overwrite input '" + in.string() + "'");
        save_mask_archive(derived.masks, target);
        r.outputs.push_back(rel(target, out));
    });
    write_manifest(run, config, out);
    return run;
}

RunResult cmd_qa(const PipelineConfig& config, const std::vector<std::string>& archives, const fs::path& out, bool filter)
{
    config.validate();
    fs::create_directories(out / "reports");
    RunResult run{"qa", {}, {}};
    std::vector<std::optional<MaskSet2D>> sets(archives.size());
    run.items = run_items(archives, config.jobs, [&](std::size_t i, ItemResult&) { sets[i] = load_mask_archive(archives[i]); });

    std::map<View, std::vector<MaskSet2D>> by_view;
    for (const auto& s : sets)
        if (s) by_view[s->view()].push_back(*s);
    std::map<View, ClassStats> stats;
    for (auto& [view, cohort] : by_view) {
        if (cohort.size() < 2)
            throw Error(ErrorCode::insufficient_cohort, "qa needs at least 2 readable " + to_string(view) +
                                                            " archives, got " + std::to_string(cohort.size()));
        stats.emplace(view, compute_class_stats(cohort));
        const fs::path sp = out / ("class_stats_" + to_string(view) + ".json");
        write_text(sp, class_stats_to_json(stats.at(view)) + "\n");
        run.outputs.push_back(rel(sp, out));
    }
    if (by_view.empty()) throw Error(ErrorCode::insufficient_cohort, "qa found no readable archives");

    if (filter) fs::create_directories(out / "filtered");
    std::vector<std::string> rows(archives.size());
    std::vector<std::optional<PlausibilityReport>> reports(archives.size());
    parallel_for(archives.size(), config.jobs, [&](std::size_t i) {
        if (!sets[i]) return;
        ItemResult& r = run.items[i];
        try {
            PlausibilityReport rep = plausibility_check(*sets[i], stats.at(sets[i]->view()), config.qa);
            if (rep.image_id.empty()) rep.image_id = archive_stem(archives[i]);
            const fs::path rp = out / "reports" / (archive_stem(archives[i]) + ".qa.json");
            write_text(rp, report_to_json(rep) + "\n");
            r.outputs.push_back(rel(rp, out));
            if (filter && rep.verdict != Verdict::fail) {
                const fs::path fp = out / "filtered" / fs::path(archives[i]).filename();
                fs::copy_file(archives[i], fp, fs::copy_options::overwrite_existing);
                r.outputs.push_back(rel(fp, out));
            }
            if (rep.verdict == Verdict::fail) {
                std::string reasons;
                for (const auto& x : rep.reasons) reasons += (reasons.empty() ? "" : ",") + x;
                r.warnings.push_back("qa fail: " + reasons);
            }
            reports[i] = std::move(rep);
        } catch (const Error& e) {
            r.ok = false;
            r.error_code = std::string(to_string(e.code()));
            r.message = e.what();
        }
    });
    std::string csv = report_csv_header() + "\n";
    for (const auto& rep : reports)
        if (rep) csv += report_csv_row(*rep) + "\n";
    write_text(out / "qa_summary.csv", csv);
    run.outputs.push_back("qa_summary.csv");
    write_manifest(run, config, out);
    return run;
}

RunResult cmd_biomarkers(const PipelineConfig& config, const std::vector<std::string>& archives, const fs::path& out)
{
    config.validate();
    fs::create_directories(out);
    RunResult run{"biomarkers", {}, {}};
    std::vector<std::optional<BiomarkerRecord>> records(archives.size());
    run.items = run_items(archives, config.jobs, [&](std::size_t i, ItemResult& r) {
        const MaskSet2D masks = load_mask_archive(archives[i]);
        const std::string id = masks.source_id().empty() ? archive_stem(archives[i]) : masks.source_id();
        records[i] = extract_biomarkers(masks, id);
        if (!records[i]->ctr_reason.empty()) r.warnings.push_back("ctr: " + records[i]->ctr_reason);
        if (!records[i]->scd_reason.empty()) r.warnings.push_back("scd: " + records[i]->scd_reason);
    });
    std::string csv = biomarker_csv_header() + "\n";
    for (const auto& rec : records)
        if (rec) csv += biomarker_csv_row(*rec) + "\n";
    write_text(out / "biomarkers.csv", csv);
    run.outputs.push_back("biomarkers.csv");
    write_manifest(run, config, out);
    return run;
}

RunResult cmd_evaluate(const PipelineConfig& config, const std::vector<std::string>& predictions,
                       const std::vector<std::string>& ground_truth, const fs::path& out)
{
    config.validate();
    if (predictions.size() != ground_truth.size())
        throw Error(ErrorCode::argument, "evaluate needs as many ground-truth archives as predictions (" +
                                             std::to_string(predictions.size()) + " vs " +
                                             std::to_string(ground_truth.size()) + ")");
    fs::create_directories(out / "scores");
    RunResult run{"evaluate", {}, {}};
    std::vector<std::optional<SegScore>> scores(predictions.size());
    run.items = run_items(predictions, config.jobs, [&](std::size_t i, ItemResult& r) {
        const MaskSet2D pred = load_mask_archive(predictions[i]);
        const MaskSet2D gt = load_mask_archive(ground_truth[i]);
        scores[i] = evaluate_masksets(pred, gt);
        const fs::path sp = out / "scores" / (archive_stem(predictions[i]) + ".eval.json");
        write_text(sp, segscore_to_json(*scores[i]) + "\n");
        r.outputs.push_back(rel(sp, out));
        for (const auto& c : scores[i]->undefined_overlap) r.warnings.push_back("undefined overlap: " + c);
    });
    std::string csv = "image,class,iou,dice,hausdorff\n";
    double s_iou = 0, s_dice = 0, s_hd = 0;
    std::size_t n_iou = 0, n_hd = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i]) continue;
        const std::string id = archive_stem(predictions[i]);
        for (const auto& c : scores[i]->classes) {
            auto f = [](const std::optional<double>& v) { return v ? fmt_real(*v) : std::string{}; };
            csv += id + "," + c.name + "," + f(c.iou) + "," + f(c.dice) + "," + f(c.hausdorff) + "\n";
        }
        if (scores[i]->mean_iou) {
            s_iou += *scores[i]->mean_iou;
            s_dice += *scores[i]->mean_dice;
            ++n_iou;
        }
        if (scores[i]->mean_hausdorff) {
            s_hd += *scores[i]->mean_hausdorff;
            ++n_hd;
        }
    }
    write_text(out / "evaluation.csv", csv);
    json summary{{"images", scores.size()},
                 {"mean_iou", n_iou ? json(s_iou / double(n_iou)) : json(nullptr)},
                 {"mean_dice", n_iou ? json(s_dice / double(n_iou)) : json(nullptr)},
                 {"mean_hausdorff", n_hd ? json(s_hd / double(n_hd)) : json(nullptr)}};
    write_text(out / "evaluation.json", summary.dump(2) + "\n");
    run.outputs = {"evaluation.csv", "evaluation.json"};
    write_manifest(run, config, out);
    return run;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw Error(ErrorCode::format, "unterminated quote in '" + path.string() + "'");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

CohortTable load_cohort_csv(const fs::path& csv, const CohortOptions& o, std::vector<std::string>* skipped)
{
    const auto rows = read_csv(csv);
    if (rows.empty()) throw Error(ErrorCode::format, "cohort CSV '" + csv.string() + "' is empty");
    const auto& header = rows.front();
    auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
        if (required) throw Error(ErrorCode::format, "cohort CSV lacks column '" + name + "'");
        return std::nullopt;
    };
    const std::size_t label_col = *column(o.label_column, true);
    const std::size_t value_col = *column(o.value_column, true);
    const auto id_col = column(o.id_column, false);
    const auto sex_col = column(o.sex_column, false);
    const auto age_col = column(o.age_column, false);
    CohortTable table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto cell = [&](std::optional<std::size_t> c) { return c && *c < row.size() ? row[*c] : std::string{}; };
        CohortRow cr;
        cr.id = id_col ? cell(id_col) : std::to_string(r);
        const std::string value = cell(value_col);
        const std::string label = cell(label_col);
        if (value.empty() || label.empty()) {
            if (skipped) skipped->push_back(cr.id);
            continue;
        }
        const auto vres = std::from_chars(value.data(), value.data() + value.size(), cr.value);
        if (vres.ec != std::errc{} || vres.ptr != value.data() + value.size())
            throw Error(ErrorCode::format, "cohort row " + std::to_string(r) + ": value '" + value + "' is not a number");
        if (label == "1" || label == "true")
            cr.label = 1;
        else if (label == "0" || label == "false")
            cr.label = 0;
        else
            throw Error(ErrorCode::format, "cohort row " + std::to_string(r) + ": label '" + label + "' is not binary");
        cr.sex = cell(sex_col);
        cr.age_group = cell(age_col);
        table.rows.push_back(std::move(cr));
    }
    table.validate();
    return table;
}

RunResult cmd_cohort(const PipelineConfig& config, const fs::path& csv, const CohortOptions& options, const fs::path& out)
{
    config.validate();
    fs::create_directories(out);
    RunResult run{"cohort", {}, {}};
    ItemResult item;
    item.input = csv.string();
    std::vector<std::string> skipped;
    const CohortTable table = load_cohort_csv(csv, options, &skipped);
    std::vector<double> pos, neg, scores;
    std::vector<int> labels;
    for (const auto& r : table.rows) {
        (r.label ? pos : neg).push_back(r.value);
        scores.push_back(r.value);
        labels.push_back(r.label);
    }
    json report{{"n_pos", pos.size()}, {"n_neg", neg.size()}, {"skipped", skipped},
                {"value_column", options.value_column}, {"label_column", options.label_column}};
    try {
        const TTestResult t = t_test(pos, neg, config.t_test);
        report["t_test"] = {{"kind", config.t_test == TTestKind::welch ? "welch" : "student"},
                            {"t", t.t},
                            {"p", t.p},
                            {"df", t.df}};
    } catch (const Error& e) {
        report["t_test"] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
        item.warnings.push_back(std::string("t-test: ") + e.what());
    }
    try {
        const RocResult roc = roc_auc(scores, labels);
        report["auc"] = roc.auc;
        write_text(out / "roc.csv", roc_to_csv(roc));
        run.outputs.push_back("roc.csv");
    } catch (const Error& e) {
        report["auc"] = nullptr;
        item.warnings.push_back(std::string("roc: ") + e.what());
    }
    write_text(out / "cohort_report.json", report.dump(2) + "\n");
    run.outputs.push_back("cohort_report.json");

    // Group summary: per grouping column, per group value and label.
    std::string gs = "group_by,group,label,n,mean,std\n";
    auto summarize = [&](const std::string& by, auto key) {
        std::map<std::pair<std::string, int>, std::vector<double>> groups;
        for (const auto& r : table.rows) groups[{key(r), r.label}].push_back(r.value);
        for (const auto& [k, v] : groups) {
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= double(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            const std::string sd = v.size() > 1 ? fmt_real(std::sqrt(ss / double(v.size() - 1))) : std::string{};
            gs += by + "," + k.first + "," + std::to_string(k.second) + "," + std::to_string(v.size()) + "," +
                  fmt_real(mean) + "," + sd + "\n";
        }
    };
    summarize("all", [](const CohortRow&) { return std::string("all"); });
    summarize("sex", [](const CohortRow& r) { return r.sex; });
    summarize("age_group", [](const CohortRow& r) { return r.age_group; });
    write_text(out / "group_summary.csv", gs);
    run.outputs.push_back("group_summary.csv");
    run.items.push_back(std::move(item));
    write_manifest(run, config, out);
    return run;
}

RunResult cmd_phantom(const PipelineConfig& config, const PhantomOptions& o, const fs::path& out)
{
    config.validate();
    if (o.format != "json" && o.format != "nii" && o.format != "nii.gz")
        throw Error(ErrorCode::argument, "phantom format must be json, nii or nii.gz");
    fs::create_directories(out / "specs");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < o.count; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "phantom_%03zu", i);
        names.emplace_back(buf);
    }
    RunResult run{"phantom", {}, {}};
    run.items = run_items(names, config.jobs, [&](std::size_t i, ItemResult& r) {
        PhantomSpec spec;
        if (o.spec) {
            std::ifstream in(*o.spec);
            if (!in) throw Error(ErrorCode::io, "cannot open phantom spec '" + o.spec->string() + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            spec = phantom_spec_from_json(ss.str());
        } else {
            spec = PhantomSpec::standard({o.size, o.size, o.size});
            const double scale = (static_cast<double>(o.size) - 1.0) / 255.0;
            if (o.variant == "enlarged-heart")
                spec = enlarged_heart_variant(spec, o.heart_half_width * scale);
            else if (o.variant == "symmetric")
                spec = symmetric_variant(spec);
            else if (o.variant == "scoliosis")
                spec = scoliosis_variant(spec, o.amplitude, 2.0 * spec.spine.length());
            else if (o.variant != "standard")
                throw Error(ErrorCode::argument, "unknown phantom variant '" + o.variant + "'");
        }
        const std::uint64_t seed = o.seed + i;
        spec.seed = seed;
        if (o.jitter > 0.0) spec = jitter_spec(spec, seed, o.jitter);
        if (o.noise_hu > 0.0) spec.noise_hu = o.noise_hu;
        const Phantom p = generate_phantom(spec);
        const fs::path vol = out / (names[i] + "." + o.format);
        save_volume(p.volume, vol);
        const fs::path lab = labels_path_for(vol);
        save_labels(p.labels, lab);
        const fs::path sp = out / "specs" / (names[i] + ".phantom.json");
        write_text(sp, phantom_spec_to_json(spec) + "\n");
        r.outputs = {rel(vol, out), rel(lab, out), rel(sp, out)};
        if (o.format == "json") r.outputs.insert(r.outputs.begin() + 1, names[i] + ".raw");
    });
    write_manifest(run, config, out);
    return run;
}

} // namespace ctxr
