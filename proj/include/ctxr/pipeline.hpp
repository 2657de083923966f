#pragma once

#include "ctxr/metrics.hpp"
#include "ctxr/projection.hpp"
#include "ctxr/qa.hpp"
#include "ctxr/regions.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ctxr {

std::string_view tool_version();

enum class ViewSelection { frontal, lateral, both };
ViewSelection parse_view_selection(const std::string& name);
std::vector<View> views_of(ViewSelection selection);

/// Every tunable of the batch pipeline. Loaded from one JSON document in
/// which all keys are optional; unknown keys are rejected.
struct PipelineConfig {
    ProjectionConfig projection;
    RegionRuleConfig regions;
    QaConfig qa;
    TTestKind t_test = TTestKind::welch;
    ViewSelection views = ViewSelection::both;
    bool write_masks = true;       // project: also project labels when present
    bool derive_on_project = false;  // project: run region rules on projected masks
    std::vector<std::string> inputs;  // paths or file-name globs, used when none are given on the command line
    std::string out;
    int jobs = 1;

    void validate() const;
    /// Canonical JSON of everything that affects outputs (excludes jobs, inputs and out).
    std::string canonical_json() const;
    std::string hash() const;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig parse_pipeline_config(const std::string& text);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Expands entries containing '*' or '?' in their file name against the
/// directory part; results are sorted. Plain paths are kept as given.
std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Items are claimed from
/// a shared counter, so the work split adapts to uneven item costs.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

struct ItemResult {
    std::string input;
    bool ok = true;
    std::string error_code;
    std::string message;
    std::vector<std::string> outputs;  // relative to the output root
    std::vector<std::string> warnings;
};

struct RunResult {
    std::string command;
    std::vector<ItemResult> items;
    std::vector<std::string> outputs;  // run-level files, relative to the output root

    bool ok() const;
    std::size_t failures() const;
};

/// Writes `<out>/manifest.json` for a run.
void write_manifest(const RunResult& run, const PipelineConfig& config, const std::filesystem::path& out);

RunResult cmd_project(const PipelineConfig& config, const std::vector<std::string>& volumes,
                      const std::filesystem::path& out);
RunResult cmd_derive_regions(const PipelineConfig& config, const std::vector<std::string>& archives,
                             const std::filesystem::path& out);
/// Throws Error(insufficient_cohort) when a view has fewer than two readable archives.
RunResult cmd_qa(const PipelineConfig& config, const std::vector<std::string>& archives,
                 const std::filesystem::path& out, bool filter);
RunResult cmd_biomarkers(const PipelineConfig& config, const std::vector<std::string>& archives,
                         const std::filesystem::path& out);
/// Pairs predictions with ground truth by position.
RunResult cmd_evaluate(const PipelineConfig& config, const std::vector<std::string>& predictions,
                       const std::vector<std::string>& ground_truth, const std::filesystem::path& out);

struct CohortOptions {
    std::string label_column = "label";
    std::string value_column = "ctr";
    std::string id_column = "id";
    std::string sex_column = "sex";
    std::string age_column = "age_group";
};

CohortTable load_cohort_csv(const std::filesystem::path& csv, const CohortOptions& options,
                            std::vector<std::string>* skipped = nullptr);
RunResult cmd_cohort(const PipelineConfig& config, const std::filesystem::path& csv, const CohortOptions& options,
                     const std::filesystem::path& out);

struct PhantomOptions {
    std::size_t size = 256;
    std::size_t count = 1;
    std::uint64_t seed = 0;
    std::string variant = "standard";  // standard | enlarged-heart | symmetric | scoliosis
    double heart_half_width = 87.0;    // enlarged-heart, in 256-grid voxels
    double amplitude = 8.0;            // scoliosis, voxels
    double jitter = 0.0;
    double noise_hu = 0.0;
    std::string format = "json";       // json | nii | nii.gz
    std::optional<std::filesystem::path> spec;  // explicit spec file instead of a variant
};

RunResult cmd_phantom(const PipelineConfig& config, const PhantomOptions& options, const std::filesystem::path& out);

/// Minimal RFC 4180 reader: header row plus records, quoted fields allowed.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

} // namespace ctxr
