#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "srtrl/engines.hpp"
#include "srtrl/metrics.hpp"
#include "srtrl/optim.hpp"
#include "srtrl/tasks.hpp"

namespace srtrl {

inline constexpr int kConfigVersion = 1;

/// Default seed list used when a config omits `seeds`.
inline const std::vector<std::uint64_t> kDefaultSeeds{42, 123, 7, 2024, 31337};

struct TaskSpec {
    std::string kind;  // sine_shift | multi_sine | lorenz | copy | adding | csv
    nlohmann::json params = nlohmann::json::object();
};

struct ModelSpec {
    std::string kind = "rnn";  // rnn | lstm
    Index n = 64;
};

struct EngineEntry {
    EngineSpec spec;
    /// Stop parameter updates from the first shift point on (frozen decoder).
    bool freeze_after_shift = false;

    std::string label() const { return spec.label() + (freeze_after_shift ? "-frozen" : ""); }
};

struct OptimizerSpec {
    std::string kind = "adam";  // adam | sgd
    AdamConfig adam;
    double sgd_lr = 0.01;
};

struct Diagnostics {
    bool cosine_reference = false;  // shadow full-RTRL engine in lockstep
    Index spectral_every = 0;       // 0 disables snapshots
    bool jacobian_dump = false;
    Index window = kDefaultWindow;
};

struct ExperimentConfig {
    std::string name;
    TaskSpec task;
    ModelSpec model;
    std::vector<EngineEntry> engines;
    OptimizerSpec optimizer;
    std::vector<std::uint64_t> seeds = kDefaultSeeds;
    std::filesystem::path output_dir;
    Diagnostics diagnostics;
    unsigned jobs = 1;

    /// Normalised JSON with every default filled in.
    nlohmann::json to_json() const;
};

/// Parses and validates against the versioned schema. Unknown keys, bad
/// types and inconsistent values (k > n, unsupported engine for the model)
/// raise ConfigError naming the offending path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the stream for one seed (copy and adding draw from the seed).
StreamTask make_task(const TaskSpec& spec, std::uint64_t seed);

/// One online run: forward, loss, engine step, optimizer step, log.
/// Divergence is captured in the record, never thrown.
RunRecord run_single(const ExperimentConfig& cfg, const EngineEntry& engine, std::uint64_t seed,
                     const StreamTask* task = nullptr);

struct RunOptions {
    std::optional<unsigned> jobs;  // overrides cfg.jobs
    bool write_outputs = true;
};

/// All (engine x seed) cells. Cells run concurrently; files are written by
/// the calling thread in grid order as `{task}_{engine}_{seed}.csv/.json`.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// `cfg.output_dir`, or `$SRTRL_OUTPUT_ROOT/<name>` (default root `runs`)
/// when the config leaves it empty.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Writes the CSV log and JSON summary of one record into `dir`.
void write_record(const std::filesystem::path& dir, const RunRecord& record, Index window_len);

/// `key=v1,v2,...`; keys: k, strategy, lambda, window (engine), lr
/// (optimizer), n (model).
struct SweepParam {
    std::string key;
    std::vector<std::string> values;
};

SweepParam parse_sweep_param(const std::string& text);

/// Expands the engine list (and model/optimizer for n/lr) over the cross
/// product of the parameters. Engines a parameter does not apply to are kept
/// once.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg,
                                           const std::vector<SweepParam>& params);

struct ReportRow {
    std::string task;
    std::string engine;
    std::optional<Index> k;
    Index seeds = 0;
    Index diverged = 0;
    std::optional<double> mse_mean;
    std::optional<double> mse_sd;
    std::optional<double> recovery_mean;
    std::optional<double> recovery_sd;
    std::optional<double> bci_mean;
    std::optional<double> bci_sd;
    std::optional<double> acc_mean;  // classification tasks
    std::optional<double> acc_sd;
    std::vector<std::optional<double>> per_seed_mse;
    std::vector<std::optional<double>> per_seed_recovery;
    std::vector<std::uint64_t> seed_ids;
};

/// Aggregates every run summary in `dir` into one row per (task, engine).
/// Recovery is computed per seed against that seed's floor (traces / k = 0)
/// and ceiling (full RTRL / k = n) and then averaged.
std::vector<ReportRow> build_report(const std::filesystem::path& dir);
void write_report(const std::filesystem::path& dir, const std::vector<ReportRow>& rows);
std::string format_report(const std::vector<ReportRow>& rows);

}  // namespace srtrl
