#pragma once

// Experiment driver: per-seed runs, regret and timing summaries, eigenvalue
// and sandwich diagnostics, timing benchmarks and seed aggregation.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slateglm/env.hpp"
#include "slateglm/harness/config.hpp"
#include "slateglm/learners.hpp"

namespace slateglm::harness {

struct RoundRecord {
  std::size_t t = 0;
  std::vector<std::size_t> indices;
  int reward = 0;
  double regret_increment = 0.0;
  double cumulative_regret = 0.0;
  std::int64_t pull_ns = 0;
  std::int64_t update_ns = 0;
  bool warmup = false;
  int rejections = 0;
  bool rejection_exhausted = false;
  Vector min_eig;  ///< lambda_min(W^i_t) per slot after the update; empty when not sampled
};

struct SandwichSample {
  std::size_t t = 0;
  bool tight = false;  ///< 3/4 U <= W <= 5/4 U
  bool loose = false;  ///< 1/2 U <= W <= 3/2 U
  double loose_lower_margin = 0.0;
  double loose_upper_margin = 0.0;
};

struct SeedTrace {
  std::uint64_t seed = 0;
  double theta_norm = 0.0;  ///< ||theta*||
  double s = 0.0;           ///< bound handed to the learner
  double kappa = 0.0;
  std::size_t slots = 0;
  std::vector<RoundRecord> rounds;
  std::vector<SandwichSample> sandwich;
};

/// Instance for a run seed: shared when instance_seed is set, otherwise drawn from the seed.
env::Instance instance_for(const ExperimentConfig& config, std::uint64_t seed);

/// Learner options resolved from config and instance.
bandit::LearnerOptions learner_options(const ExperimentConfig& config, const env::Instance& instance,
                                       const env::Environment& environment, std::uint64_t seed);

/// One seed, all rounds, with the configured diagnostics sampled after each update.
SeedTrace run_seed(const ExperimentConfig& config, const env::Instance& instance, std::uint64_t seed);
SeedTrace run_seed(const ExperimentConfig& config, std::uint64_t seed);

/// Powers of two up to T, then T.
std::vector<std::size_t> checkpoints(std::size_t rounds);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
  std::size_t samples = 0;
};
/// Ordinary least squares of y on x with Pearson correlation.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct SandwichReport {
  std::size_t samples = 0;
  std::size_t first_tight = 0;  ///< 0 when never
  bool tight_persists = false;  ///< holds at every sample from first_tight on
  std::size_t first_loose = 0;
  bool loose_persists = false;
  bool loose_from_threshold = false;  ///< holds at every sample with t >= sandwich_from
  double worst_loose_margin = 0.0;    ///< smallest margin over those samples
};
SandwichReport sandwich_report(const std::vector<SandwichSample>& samples, std::size_t from);

struct SeedSummary {
  std::uint64_t seed = 0;
  std::vector<std::size_t> checkpoint_rounds;
  std::vector<double> checkpoint_regret;
  std::size_t warmup_rounds = 0;
  std::int64_t rejections = 0;
  std::size_t rejection_exhaustions = 0;
  double pull_mean_ns = 0.0;
  double pull_max_ns = 0.0;
  double update_mean_ns = 0.0;
  double update_max_ns = 0.0;
  std::vector<LineFit> eig_fits;  ///< per slot; empty when not sampled
  SandwichReport sandwich;
};
SeedSummary summarize(const SeedTrace& trace, const ExperimentConfig& config);

struct AggregatePoint {
  std::size_t t = 0;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation, 0 for one value
  double lower = 0.0;
  double upper = 0.0;
};
/// Mean and mean -/+ 2 sd of the values.
AggregatePoint aggregate_point(std::size_t t, const std::vector<double>& values);

struct RunSummary {
  std::string config_hash;
  std::vector<SeedSummary> seeds;
  std::vector<AggregatePoint> regret;  ///< at checkpoints
};

/// Runs every seed (in a worker pool of config.threads) and returns traces in seed order.
std::vector<SeedTrace> run_all_seeds(const ExperimentConfig& config);
RunSummary summarize_run(const ExperimentConfig& config, const std::vector<SeedTrace>& traces);

/// CSV cells of a trace, without the machine-dependent timing columns.
std::vector<std::string> round_columns(const ExperimentConfig& config);
void write_round_csv(const std::filesystem::path& path, const ExperimentConfig& config, const SeedTrace& trace);
void write_timing_csv(const std::filesystem::path& path, const SeedTrace& trace);
void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregatePoint>& points);
void write_summary_json(const std::filesystem::path& path, const ExperimentConfig& config, const RunSummary& summary);

/// <output_dir>/<config hash>-<UTC timestamp>, created; a numeric suffix avoids collisions.
std::filesystem::path make_run_dir(const ExperimentConfig& config);

/// Full run: seed_<s>.csv, seed_<s>_timing.csv, aggregate.csv, summary.json, config.txt under run_dir.
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& run_dir);

struct BenchCell {
  std::size_t slots = 0;
  bandit::Algorithm algorithm{};
  bool feasible = true;
  std::size_t measured = 0;
  double pull_mean_ns = 0.0;
  double pull_max_ns = 0.0;
  double update_mean_ns = 0.0;
  double update_max_ns = 0.0;
};
/// Serial timing of each bench algorithm for each N, on the first seed.
std::vector<BenchCell> run_timing_bench(const ExperimentConfig& config, const std::vector<std::size_t>& slot_range);
void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchCell>& cells);

struct DiagnosticReport {
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<LineFit>> eig_fits;  ///< [seed][slot]
  std::vector<SandwichReport> sandwich;        ///< [seed]
};
/// Runs with eigenvalue and sandwich sampling (every 100 rounds unless configured).
DiagnosticReport run_diagnostics(const ExperimentConfig& config);
DiagnosticReport diagnostics_from(const ExperimentConfig& config, const std::vector<SeedTrace>& traces);
void write_diagnostics_json(const std::filesystem::path& path, const DiagnosticReport& report);

struct PlotRow {
  std::string metric;
  AggregatePoint point;
};
/// Merges per-seed round CSVs into long-format (metric, t) series. Throws SchemaError naming the offending column.
std::vector<PlotRow> emit_plot_data(const std::vector<std::filesystem::path>& csvs);
void write_plot_csv(const std::filesystem::path& path, const std::vector<PlotRow>& rows);

}  // namespace slateglm::harness
