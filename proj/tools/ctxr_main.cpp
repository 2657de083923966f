#include "ctxr/error.hpp"
#include "ctxr/pipeline.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 1 at least one item failed, 2 usage or run-level error.
int report(const ctxr::RunResult& run, const fs::path& out)
{
    for (const auto& item : run.items) {
        if (!item.ok)
            spdlog::error("{}: {} ({})", item.input, item.message, item.error_code);
        for (const auto& w : item.warnings) spdlog::warn("{}: {}", item.input, w);
    }
    spdlog::info("{}: {} item(s), {} failed; manifest at {}", run.command, run.items.size(), run.failures(),
                 (out / "manifest.json").string());
    return run.ok() ? 0 : 1;
}

std::vector<std::string> resolve_inputs(const std::vector<std::string>& given, const ctxr::PipelineConfig& config)
{
    auto inputs = ctxr::expand_inputs(given.empty() ? config.inputs : given);
    if (inputs.empty()) throw ctxr::Error(ctxr::ErrorCode::argument, "no inputs given");
    return inputs;
}

} // namespace

int main(int argc, char** argv)
{
    spdlog::set_default_logger(spdlog::stderr_color_st("ctxr"));
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"Pseudo-radiographs, anatomical regions, QA and biomarkers from CT label volumes"};
    app.set_version_flag("--version", std::string(ctxr::tool_version()));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    int jobs = 0;
    std::string view;
    app.add_option("--config", config_path, "JSON pipeline configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output root directory");
    app.add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);
    app.add_option("--view", view, "frontal, lateral or both")->check(CLI::IsMember({"frontal", "lateral", "both"}));

    std::vector<std::string> inputs;
    std::vector<std::string> gt;
    bool filter = false;
    ctxr::CohortOptions cohort;
    std::string cohort_csv;
    ctxr::PhantomOptions phantom;
    std::string phantom_spec;

    auto* project = app.add_subcommand("project", "Project volumes (and their labels) to pseudo-radiographs");
    project->add_option("inputs", inputs, "Volume files or globs (*.nii, *.nii.gz, *.json)");

    auto* derive = app.add_subcommand("derive-regions", "Add rule-based anatomical regions to mask archives");
    derive->add_option("inputs", inputs, "Mask archives");

    auto* qa = app.add_subcommand("qa", "Cohort statistics and plausibility reports for mask archives");
    qa->add_option("inputs", inputs, "Mask archives");
    qa->add_flag("--filter", filter, "Copy non-failing archives to <out>/filtered");

    auto* bio = app.add_subcommand("biomarkers", "Cardio-thoracic ratio and spine-center distance per archive");
    bio->add_option("inputs", inputs, "Frontal mask archives");

    auto* eval = app.add_subcommand("evaluate", "IoU, DICE and Hausdorff of predictions against ground truth");
    eval->add_option("--pred", inputs, "Predicted mask archives")->required();
    eval->add_option("--gt", gt, "Ground-truth mask archives, paired by position")->required();

    auto* coh = app.add_subcommand("cohort", "t-test, ROC and group summary over a biomarker table");
    coh->add_option("csv", cohort_csv, "CSV with value and label columns")->required()->check(CLI::ExistingFile);
    coh->add_option("--label-column", cohort.label_column, "Binary label column")->capture_default_str();
    coh->add_option("--value-column", cohort.value_column, "Score column")->capture_default_str();
    coh->add_option("--id-column", cohort.id_column)->capture_default_str();
    coh->add_option("--sex-column", cohort.sex_column)->capture_default_str();
    coh->add_option("--age-column", cohort.age_column)->capture_default_str();

    auto* ph = app.add_subcommand("phantom", "Generate synthetic thorax volumes with labels");
    ph->add_option("--size", phantom.size, "Grid edge length")->capture_default_str()->check(CLI::Range(32, 1024));
    ph->add_option("--count", phantom.count, "Number of phantoms")->capture_default_str();
    ph->add_option("--seed", phantom.seed, "Seed of the first phantom")->capture_default_str();
    ph->add_option("--variant", phantom.variant)
        ->capture_default_str()
        ->check(CLI::IsMember({"standard", "enlarged-heart", "symmetric", "scoliosis"}));
    ph->add_option("--heart-half-width", phantom.heart_half_width, "Enlarged heart half-width at 256 voxels")
        ->capture_default_str();
    ph->add_option("--amplitude", phantom.amplitude, "Scoliosis amplitude in voxels")->capture_default_str();
    ph->add_option("--jitter", phantom.jitter, "Geometry jitter in voxels")->capture_default_str();
    ph->add_option("--noise", phantom.noise_hu, "Uniform noise amplitude in HU")->capture_default_str();
    ph->add_option("--format", phantom.format)->capture_default_str()->check(CLI::IsMember({"json", "nii", "nii.gz"}));
    ph->add_option("--spec", phantom_spec, "Phantom spec JSON")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; every other parse failure is a usage error.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ctxr::PipelineConfig config = config_path.empty() ? ctxr::PipelineConfig{} : ctxr::load_pipeline_config(config_path);
        if (jobs > 0) config.jobs = jobs;
        if (!view.empty()) config.views = ctxr::parse_view_selection(view);
        if (!out_dir.empty()) config.out = out_dir;
        if (config.out.empty()) throw ctxr::Error(ctxr::ErrorCode::argument, "--out is required");
        config.validate();
        const fs::path out(config.out);

        if (project->parsed()) {
            auto vols = resolve_inputs(inputs, config);
            std::erase_if(vols, [](const std::string& p) {
                return p.ends_with(".labels.json") || p.ends_with(".masks.json") || p.ends_with(".phantom.json");
            });
            return report(ctxr::cmd_project(config, vols, out), out);
        }
        if (derive->parsed()) return report(ctxr::cmd_derive_regions(config, resolve_inputs(inputs, config), out), out);
        if (qa->parsed()) return report(ctxr::cmd_qa(config, resolve_inputs(inputs, config), out, filter), out);
        if (bio->parsed()) return report(ctxr::cmd_biomarkers(config, resolve_inputs(inputs, config), out), out);
        if (eval->parsed())
            return report(ctxr::cmd_evaluate(config, ctxr::expand_inputs(inputs), ctxr::expand_inputs(gt), out), out);
        if (coh->parsed()) return report(ctxr::cmd_cohort(config, cohort_csv, cohort, out), out);
        if (ph->parsed()) {
            if (!phantom_spec.empty()) phantom.spec = phantom_spec;
            return report(ctxr::cmd_phantom(config, phantom, out), out);
        }
    } catch (const ctxr::Error& e) {
        spdlog::error("{} ({})", e.what(), ctxr::to_string(e.code()));
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 2;
}
