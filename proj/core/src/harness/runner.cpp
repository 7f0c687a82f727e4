#include "slateglm/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "slateglm/harness/csv.hpp"

namespace slateglm::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kDefaultDiagEvery = 100;

double learner_s(const ExperimentConfig& config, double theta_norm) {
  return config.s_mode == SMode::kExact ? theta_norm : std::max(theta_norm, config.s_bound);
}

json fit_json(const LineFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"correlation", f.correlation}, {"samples", f.samples}};
}

json sandwich_json(const SandwichReport& r) {
  return {{"samples", r.samples},
          {"first_round_3_4_5_4", r.first_tight},
          {"persists_3_4_5_4", r.tight_persists},
          {"first_round_1_2_3_2", r.first_loose},
          {"persists_1_2_3_2", r.loose_persists},
          {"holds_1_2_3_2_from_threshold", r.loose_from_threshold},
          {"worst_margin_1_2_3_2_from_threshold", r.worst_loose_margin}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace

env::Instance instance_for(const ExperimentConfig& config, std::uint64_t seed) {
  return env::make_instance(config.instance, config.shared_instance ? config.instance_seed : seed);
}

bandit::LearnerOptions learner_options(const ExperimentConfig& config, const env::Instance& instance,
                                       const env::Environment& environment, std::uint64_t seed) {
  bandit::LearnerOptions o;
  auto& lc = o.config;
  lc.slots = config.instance.slots;
  lc.dim = config.instance.dim;
  lc.s = learner_s(config, instance.s);
  lc.delta = config.delta;
  lc.schedule = config.schedule;
  lc.kappa = lc.s > 0.0 ? glm::kappa_bound(lc.s, environment.max_slate_norm()) : 1.0 / glm::dmu(0.0);
  lc.solver = config.solver;
  lc.refresh_interval = config.refresh_interval;
  lc.rejection_cap = config.rejection_cap;
  lc.ts_scale = config.ts_scale;
  o.seed = derive_seed(seed, Stream::kLearner);
  o.tau = resolved_tau(config);
  o.lambda_reg = config.lambda_reg;
  o.enumeration_cap = config.enumeration_cap;
  return o;
}

SeedTrace run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  return run_seed(config, instance_for(config, seed), seed);
}

SeedTrace run_seed(const ExperimentConfig& config, const env::Instance& instance, std::uint64_t seed) {
  env::Environment environment(instance, seed);
  const auto options = learner_options(config, instance, environment, seed);
  auto learner = bandit::make_learner(config.algorithm, options);

  SeedTrace trace;
  trace.seed = seed;
  trace.theta_norm = instance.s;
  trace.s = options.config.s;
  trace.kappa = options.config.kappa;
  trace.slots = config.instance.slots;
  trace.rounds.reserve(config.rounds);

  const bandit::RewardFn reward = [&environment](const Slate& s) { return environment.sample_reward(s); };
  double cumulative = 0.0;
  for (std::size_t t = 1; t <= config.rounds; ++t) {
    const auto& itemsets = environment.gen_itemsets(t);
    const auto rec = bandit::step(*learner, itemsets, reward);
    RoundRecord r;
    r.t = t;
    r.indices = rec.slate.indices();
    r.reward = rec.reward;
    r.regret_increment = env::regret_increment(rec.slate, itemsets, instance.theta_star);
    cumulative += r.regret_increment;
    r.cumulative_regret = cumulative;
    r.pull_ns = rec.pull_ns;
    r.update_ns = rec.update_ns;
    r.warmup = rec.warmup;
    r.rejections = rec.rejections;
    r.rejection_exhausted = rec.rejection_exhausted;

    const bandit::OnlineState* state = learner->state();
    if (state != nullptr && config.eig_every > 0 && t % config.eig_every == 0) {
      for (const auto& w : state->slot_designs) r.min_eig.push_back(linalg::min_eigenvalue(w.matrix()));
    }
    if (state != nullptr && config.sandwich_every > 0 && t % config.sandwich_every == 0) {
      const linalg::SymMatrix u = state->slot_block_diag();
      const linalg::SymMatrix& w = state->design.matrix();
      const auto tight = linalg::psd_sandwich_check(u, w, 0.75, 1.25);
      const auto loose = linalg::psd_sandwich_check(u, w, 0.5, 1.5);
      trace.sandwich.push_back({t, tight.holds, loose.holds, loose.lower_margin, loose.upper_margin});
    }
    trace.rounds.push_back(std::move(r));
  }
  return trace;
}

std::vector<std::size_t> checkpoints(std::size_t rounds) {
  std::vector<std::size_t> out;
  for (std::size_t p = 1; p < rounds; p *= 2) out.push_back(p);
  out.push_back(rounds);
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: length mismatch");
  LineFit f;
  f.samples = x.size();
  if (x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx > 0.0) f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (sxx > 0.0 && syy > 0.0) f.correlation = sxy / std::sqrt(sxx * syy);
  return f;
}

SandwichReport sandwich_report(const std::vector<SandwichSample>& samples, std::size_t from) {
  SandwichReport r;
  r.samples = samples.size();
  std::size_t last_tight_fail = 0, last_loose_fail = 0;
  bool any_from = false;
  r.loose_from_threshold = true;
  r.worst_loose_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (s.tight && r.first_tight == 0) r.first_tight = s.t;
    if (s.loose && r.first_loose == 0) r.first_loose = s.t;
    if (!s.tight) last_tight_fail = s.t;
    if (!s.loose) last_loose_fail = s.t;
    if (s.t >= from) {
      any_from = true;
      r.loose_from_threshold = r.loose_from_threshold && s.loose;
      r.worst_loose_margin = std::min({r.worst_loose_margin, s.loose_lower_margin, s.loose_upper_margin});
    }
  }
  r.tight_persists = r.first_tight != 0 && last_tight_fail < r.first_tight;
  r.loose_persists = r.first_loose != 0 && last_loose_fail < r.first_loose;
  if (!any_from) {
    r.loose_from_threshold = false;
    r.worst_loose_margin = 0.0;
  }
  return r;
}

SeedSummary summarize(const SeedTrace& trace, const ExperimentConfig& config) {
  SeedSummary s;
  s.seed = trace.seed;
  for (std::size_t t : checkpoints(trace.rounds.size())) {
    s.checkpoint_rounds.push_back(t);
    s.checkpoint_regret.push_back(trace.rounds[t - 1].cumulative_regret);
  }
  double pull_sum = 0.0, update_sum = 0.0;
  std::vector<std::vector<double>> eig_t(trace.slots), eig_v(trace.slots);
  for (const auto& r : trace.rounds) {
    s.warmup_rounds += r.warmup ? 1 : 0;
    s.rejections += r.rejections;
    s.rejection_exhaustions += r.rejection_exhausted ? 1 : 0;
    pull_sum += static_cast<double>(r.pull_ns);
    update_sum += static_cast<double>(r.update_ns);
    s.pull_max_ns = std::max(s.pull_max_ns, static_cast<double>(r.pull_ns));
    s.update_max_ns = std::max(s.update_max_ns, static_cast<double>(r.update_ns));
    for (std::size_t i = 0; i < r.min_eig.size(); ++i) {
      eig_t[i].push_back(static_cast<double>(r.t));
      eig_v[i].push_back(r.min_eig[i]);
    }
  }
  if (!trace.rounds.empty()) {
    s.pull_mean_ns = pull_sum / static_cast<double>(trace.rounds.size());
    s.update_mean_ns = update_sum / static_cast<double>(trace.rounds.size());
  }
  if (!eig_t.empty() && !eig_t.front().empty()) {
    for (std::size_t i = 0; i < trace.slots; ++i) s.eig_fits.push_back(fit_line(eig_t[i], eig_v[i]));
  }
  s.sandwich = sandwich_report(trace.sandwich, config.sandwich_from);
  return s;
}

AggregatePoint aggregate_point(std::size_t t, const std::vector<double>& values) {
  AggregatePoint p;
  p.t = t;
  p.n = values.size();
  if (values.empty()) return p;
  double sum = 0.0;
  for (double v : values) sum += v;
  p.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - p.mean) * (v - p.mean);
    p.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  p.lower = p.mean - 2.0 * p.sd;
  p.upper = p.mean + 2.0 * p.sd;
  return p;
}

std::vector<SeedTrace> run_all_seeds(const ExperimentConfig& config) {
  std::vector<SeedTrace> traces(config.seeds.size());
  const std::size_t workers = std::min(config.threads, config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < config.seeds.size(); k = next++) {
      try {
        traces[k] = run_seed(config, config.seeds[k]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return traces;
}

RunSummary summarize_run(const ExperimentConfig& config, const std::vector<SeedTrace>& traces) {
  RunSummary summary;
  summary.config_hash = config_hash(config);
  for (const auto& tr : traces) summary.seeds.push_back(summarize(tr, config));
  if (summary.seeds.empty()) return summary;
  const auto& rounds = summary.seeds.front().checkpoint_rounds;
  for (std::size_t k = 0; k < rounds.size(); ++k) {
    std::vector<double> values;
    for (const auto& s : summary.seeds) values.push_back(s.checkpoint_regret[k]);
    summary.regret.push_back(aggregate_point(rounds[k], values));
  }
  return summary;
}

std::vector<std::string> round_columns(const ExperimentConfig& config) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 1; i <= config.instance.slots; ++i) cols.push_back("slot_" + std::to_string(i));
  for (const char* c : {"reward", "regret_increment", "cumulative_regret", "warmup_flag", "rejections"}) cols.emplace_back(c);
  if (config.eig_every > 0) {
    for (std::size_t i = 1; i <= config.instance.slots; ++i) cols.push_back("min_eig_slot_" + std::to_string(i));
  }
  return cols;
}

void write_round_csv(const fs::path& path, const ExperimentConfig& config, const SeedTrace& trace) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trace.rounds.size());
  for (const auto& r : trace.rounds) {
    std::vector<std::string> row{std::to_string(r.t)};
    for (auto idx : r.indices) row.push_back(std::to_string(idx));
    row.push_back(std::to_string(r.reward));
    row.push_back(format_number(r.regret_increment));
    row.push_back(format_number(r.cumulative_regret));
    row.push_back(r.warmup ? "1" : "0");
    row.push_back(std::to_string(r.rejections));
    if (config.eig_every > 0) {
      for (std::size_t i = 0; i < config.instance.slots; ++i) {
        row.push_back(i < r.min_eig.size() ? format_number(r.min_eig[i]) : std::string());
      }
    }
    rows.push_back(std::move(row));
  }
  write_csv(path, kRoundsSchema, round_columns(config), rows);
}

void write_timing_csv(const fs::path& path, const SeedTrace& trace) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trace.rounds.size());
  for (const auto& r : trace.rounds) {
    rows.push_back({std::to_string(r.t), std::to_string(r.pull_ns), std::to_string(r.update_ns)});
  }
  write_csv(path, kTimingSchema, {"t", "pull_ns", "update_ns"}, rows);
}

void write_aggregate_csv(const fs::path& path, const std::vector<AggregatePoint>& points) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : points) {
    rows.push_back({std::to_string(p.t), std::to_string(p.n), format_number(p.mean), format_number(p.sd),
                    format_number(p.lower), format_number(p.upper)});
  }
  write_csv(path, kAggregateSchema, {"t", "n", "mean", "sd", "lower", "upper"}, rows);
}

void write_summary_json(const fs::path& path, const ExperimentConfig& config, const RunSummary& summary) {
  json j;
  j["config_hash"] = summary.config_hash;
  j["algorithm"] = std::string(bandit::algorithm_name(config.algorithm));
  j["rounds"] = config.rounds;
  json seeds = json::array();
  for (const auto& s : summary.seeds) {
    json e;
    e["seed"] = s.seed;
    e["checkpoints"] = s.checkpoint_rounds;
    e["cumulative_regret"] = s.checkpoint_regret;
    e["warmup_rounds"] = s.warmup_rounds;
    e["rejections"] = s.rejections;
    e["rejection_exhaustions"] = s.rejection_exhaustions;
    e["pull_ns"] = {{"mean", s.pull_mean_ns}, {"max", s.pull_max_ns}};
    e["update_ns"] = {{"mean", s.update_mean_ns}, {"max", s.update_max_ns}};
    json fits = json::array();
    for (const auto& f : s.eig_fits) fits.push_back(fit_json(f));
    e["min_eig_fits"] = fits;
    if (s.sandwich.samples > 0) e["sandwich"] = sandwich_json(s.sandwich);
    seeds.push_back(e);
  }
  j["seeds"] = seeds;
  json agg = json::array();
  for (const auto& p : summary.regret) {
    agg.push_back({{"t", p.t}, {"n", p.n}, {"mean", p.mean}, {"sd", p.sd}, {"lower", p.lower}, {"upper", p.upper}});
  }
  j["cumulative_regret"] = agg;
  write_json(path, j);
}

fs::path make_run_dir(const ExperimentConfig& config) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  const std::string base = config_hash(config) + "-" + stamp;
  fs::create_directories(config.output_dir);
  fs::path dir = config.output_dir / base;
  for (int k = 1; !fs::create_directory(dir); ++k) dir = config.output_dir / (base + "-" + std::to_string(k));
  return dir;
}

RunSummary run_experiment(const ExperimentConfig& config, const fs::path& run_dir) {
  const auto traces = run_all_seeds(config);
  const auto summary = summarize_run(config, traces);
  fs::create_directories(run_dir);
  {
    std::ofstream out(run_dir / "config.txt", std::ios::binary);
    out << canonical_text(config);
  }
  for (const auto& tr : traces) {
    const std::string stem = "seed_" + std::to_string(tr.seed);
    write_round_csv(run_dir / (stem + ".csv"), config, tr);
    write_timing_csv(run_dir / (stem + "_timing.csv"), tr);
  }
  write_aggregate_csv(run_dir / "aggregate.csv", summary.regret);
  write_summary_json(run_dir / "summary.json", config, summary);
  return summary;
}

std::vector<BenchCell> run_timing_bench(const ExperimentConfig& config, const std::vector<std::size_t>& slot_range) {
  std::vector<BenchCell> cells;
  for (std::size_t n : slot_range) {
    for (auto algorithm : config.bench_algorithms) {
      BenchCell cell;
      cell.slots = n;
      cell.algorithm = algorithm;
      ExperimentConfig c = config;
      c.instance.slots = n;
      c.algorithm = algorithm;
      c.eig_every = 0;
      c.sandwich_every = 0;
      if (bandit::is_baseline(algorithm)) {
        const double count = std::pow(static_cast<double>(c.instance.items), static_cast<double>(n));
        if (count > static_cast<double>(c.enumeration_cap)) cell.feasible = false;
      }
      SeedTrace trace;
      if (cell.feasible) {
        try {
          trace = run_seed(c, c.seeds.front());
        } catch (const EnumerationCapExceeded&) {
          cell.feasible = false;
        }
      }
      if (cell.feasible) {
        const std::size_t discard = std::min(config.bench_discard, trace.rounds.size() - 1);
        double pull = 0.0, update = 0.0;
        for (std::size_t k = discard; k < trace.rounds.size(); ++k) {
          const auto& r = trace.rounds[k];
          if (config.bench_exclude_warmup && r.warmup) continue;
          ++cell.measured;
          pull += static_cast<double>(r.pull_ns);
          update += static_cast<double>(r.update_ns);
          cell.pull_max_ns = std::max(cell.pull_max_ns, static_cast<double>(r.pull_ns));
          cell.update_max_ns = std::max(cell.update_max_ns, static_cast<double>(r.update_ns));
        }
        if (cell.measured > 0) {
          cell.pull_mean_ns = pull / static_cast<double>(cell.measured);
          cell.update_mean_ns = update / static_cast<double>(cell.measured);
        }
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

void write_bench_csv(const fs::path& path, const std::vector<BenchCell>& cells) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : cells) {
    rows.push_back({std::to_string(c.slots), std::string(bandit::algorithm_name(c.algorithm)), c.feasible ? "1" : "0",
                    std::to_string(c.measured), format_number(c.pull_mean_ns), format_number(c.pull_max_ns),
                    format_number(c.update_mean_ns), format_number(c.update_max_ns),
                    format_number(c.pull_mean_ns + c.update_mean_ns)});
  }
  write_csv(path, kBenchSchema,
            {"slots", "algorithm", "feasible", "measured_rounds", "pull_mean_ns", "pull_max_ns", "update_mean_ns",
             "update_max_ns", "round_mean_ns"},
            rows);
}

DiagnosticReport diagnostics_from(const ExperimentConfig& config, const std::vector<SeedTrace>& traces) {
  DiagnosticReport report;
  for (const auto& tr : traces) {
    const auto s = summarize(tr, config);
    report.seeds.push_back(tr.seed);
    report.eig_fits.push_back(s.eig_fits);
    report.sandwich.push_back(s.sandwich);
  }
  return report;
}

DiagnosticReport run_diagnostics(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  if (c.eig_every == 0) c.eig_every = kDefaultDiagEvery;
  if (c.sandwich_every == 0) c.sandwich_every = kDefaultDiagEvery;
  return diagnostics_from(c, run_all_seeds(c));
}

void write_diagnostics_json(const fs::path& path, const DiagnosticReport& report) {
  json seeds = json::array();
  for (std::size_t k = 0; k < report.seeds.size(); ++k) {
    json fits = json::array();
    for (const auto& f : report.eig_fits[k]) fits.push_back(fit_json(f));
    seeds.push_back({{"seed", report.seeds[k]}, {"min_eig_fits", fits}, {"sandwich", sandwich_json(report.sandwich[k])}});
  }
  write_json(path, {{"seeds", seeds}});
}

std::vector<PlotRow> emit_plot_data(const std::vector<fs::path>& csvs) {
  if (csvs.empty()) throw SchemaError("no input files");
  std::vector<CsvTable> tables;
  for (const auto& p : csvs) {
    auto table = read_csv(p);
    if (table.schema != kRoundsSchema) {
      throw SchemaError(p.string() + ": expected schema '" + std::string(kRoundsSchema) + "', got '" + table.schema + "'");
    }
    table.column("t");
    table.column("cumulative_regret");
    tables.push_back(std::move(table));
  }
  const auto& ref = tables.front().columns;
  for (std::size_t k = 1; k < tables.size(); ++k) {
    const auto& cols = tables[k].columns;
    for (std::size_t i = 0; i < std::max(cols.size(), ref.size()); ++i) {
      if (i >= cols.size() || i >= ref.size() || cols[i] != ref[i]) {
        const std::string name = i < ref.size() ? ref[i] : cols[i];
        throw SchemaError(csvs[k].string() + ": column '" + name + "' does not match " + csvs.front().string());
      }
    }
  }
  std::vector<std::string> metrics{"cumulative_regret"};
  for (const auto& c : ref)
    if (c.rfind("min_eig_slot_", 0) == 0) metrics.push_back(c);

  std::vector<PlotRow> out;
  for (const auto& metric : metrics) {
    std::map<std::size_t, std::vector<double>> by_t;
    for (const auto& table : tables) {
      const auto tc = table.column("t");
      const auto mc = table.column(metric);
      for (const auto& row : table.rows) {
        if (row[mc].empty()) continue;
        by_t[static_cast<std::size_t>(parse_number(row[tc], "t"))].push_back(parse_number(row[mc], metric));
      }
    }
    for (const auto& [t, values] : by_t) {
      if (values.size() != tables.size()) {
        throw SchemaError("column '" + metric + "': round " + std::to_string(t) + " present in " +
                          std::to_string(values.size()) + " of " + std::to_string(tables.size()) + " files");
      }
      out.push_back({metric, aggregate_point(t, values)});
    }
  }
  return out;
}

void write_plot_csv(const fs::path& path, const std::vector<PlotRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    const auto& p = r.point;
    cells.push_back({r.metric, std::to_string(p.t), std::to_string(p.n), format_number(p.mean), format_number(p.sd),
                     format_number(p.lower), format_number(p.upper)});
  }
  write_csv(path, kPlotSchema, {"metric", "t", "n", "mean", "sd", "lower", "upper"}, cells);
}

}  // namespace slateglm::harness
