// slateglm: run, bench, diag and aggregate subcommands.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "slateglm/harness/config.hpp"
#include "slateglm/harness/csv.hpp"
#include "slateglm/harness/runner.hpp"

namespace fs = std::filesystem;
using namespace slateglm;
using namespace slateglm::harness;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int cmd_run(const fs::path& config_path) {
  const auto config = load_config(config_path);
  const auto dir = make_run_dir(config);
  const auto summary = run_experiment(config, dir);
  const auto& last = summary.regret.back();
  std::printf("run dir: %s\n", dir.c_str());
  std::printf("%s T=%zu seeds=%zu cumulative regret %.4f +/- %.4f (2 sd)\n",
              std::string(bandit::algorithm_name(config.algorithm)).c_str(), config.rounds, config.seeds.size(),
              last.mean, 2.0 * last.sd);
  return kOk;
}

int cmd_bench(const fs::path& config_path, const std::string& slots) {
  const auto config = load_config(config_path);
  std::vector<std::size_t> range;
  try {
    range = parse_size_list(slots);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("--slots: ") + e.what()});
  }
  for (auto n : range)
    if (n == 0) throw ConfigError({"--slots: slot counts must be positive"});
  const auto dir = make_run_dir(config);
  const auto cells = run_timing_bench(config, range);
  write_bench_csv(dir / "bench.csv", cells);
  {
    std::ofstream out(dir / "config.txt", std::ios::binary);
    out << canonical_text(config);
  }
  std::printf("run dir: %s\n", dir.c_str());
  std::printf("%5s  %-20s %12s %12s %12s %12s\n", "N", "algorithm", "pull avg ms", "pull max ms", "upd avg ms",
              "upd max ms");
  for (const auto& c : cells) {
    const std::string name(bandit::algorithm_name(c.algorithm));
    if (!c.feasible) {
      std::printf("%5zu  %-20s %12s\n", c.slots, name.c_str(), "infeasible");
      continue;
    }
    std::printf("%5zu  %-20s %12.4f %12.4f %12.4f %12.4f\n", c.slots, name.c_str(), c.pull_mean_ns * 1e-6,
                c.pull_max_ns * 1e-6, c.update_mean_ns * 1e-6, c.update_max_ns * 1e-6);
  }
  std::printf("baseline enumeration happens inside pull: every round for changing item sets, once for fixed arms\n");
  return kOk;
}

int cmd_diag(const fs::path& config_path) {
  auto config = load_config(config_path);
  if (config.eig_every == 0) config.eig_every = 100;
  if (config.sandwich_every == 0) config.sandwich_every = 100;
  const auto dir = make_run_dir(config);
  const auto traces = run_all_seeds(config);
  const auto report = diagnostics_from(config, traces);
  for (const auto& tr : traces) write_round_csv(dir / ("seed_" + std::to_string(tr.seed) + ".csv"), config, tr);
  write_diagnostics_json(dir / "diagnostics.json", report);
  std::printf("run dir: %s\n", dir.c_str());
  for (std::size_t k = 0; k < report.seeds.size(); ++k) {
    std::printf("seed %llu:", static_cast<unsigned long long>(report.seeds[k]));
    for (std::size_t i = 0; i < report.eig_fits[k].size(); ++i) {
      std::printf(" slot%zu slope=%.4g r=%.4f", i + 1, report.eig_fits[k][i].slope, report.eig_fits[k][i].correlation);
    }
    const auto& sw = report.sandwich[k];
    std::printf(" | first (3/4,5/4)=%zu first (1/2,3/2)=%zu\n", sw.first_tight, sw.first_loose);
  }
  return kOk;
}

int cmd_aggregate(const fs::path& out, const std::vector<std::string>& files) {
  std::vector<fs::path> paths(files.begin(), files.end());
  const auto rows = emit_plot_data(paths);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_plot_csv(out, rows);
  std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logistic slate bandit experiments"};
  app.require_subcommand(1);

  std::string config_path, slots, out;
  std::vector<std::string> files;

  auto* run = app.add_subcommand("run", "Run a regret experiment over the configured seeds");
  run->add_option("--config", config_path, "Config file")->required();
  auto* bench = app.add_subcommand("bench", "Per-round pull and update timing across slot counts");
  bench->add_option("--config", config_path, "Config file")->required();
  bench->add_option("--slots", slots, "Comma list of slot counts, e.g. 3,4,5,6")->required();
  auto* diag = app.add_subcommand("diag", "Eigenvalue growth and design-matrix sandwich diagnostics");
  diag->add_option("--config", config_path, "Config file")->required();
  auto* aggregate = app.add_subcommand("aggregate", "Merge per-seed round CSVs into mean +/- 2 sd series");
  aggregate->add_option("--out", out, "Output CSV")->required();
  aggregate->add_option("files", files, "Per-seed round CSVs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*bench) return cmd_bench(config_path, slots);
    if (*diag) return cmd_diag(config_path);
    if (*aggregate) return cmd_aggregate(out, files);
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}
