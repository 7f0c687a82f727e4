#include "slateglm/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "slateglm/harness/csv.hpp"

namespace slateglm::harness {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  return out;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a finite number, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string from_u64(std::uint64_t v) { return std::to_string(v); }
std::string from_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field size_field(T ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v) { c.*member = static_cast<T>(to_u64(v)); },
          [member](const ExperimentConfig& c) { return from_u64(static_cast<std::uint64_t>(c.*member)); }};
}

Field double_field(double ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v) { c.*member = to_double(v); },
          [member](const ExperimentConfig& c) { return format_number(c.*member); }};
}

Field bool_field(bool ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v) { c.*member = to_bool(v); },
          [member](const ExperimentConfig& c) { return from_bool(c.*member); }};
}

const std::map<std::string, Field>& schema() {
  static const std::map<std::string, Field> fields = [] {
    std::map<std::string, Field> f;
    f["algorithm"] = {[](ExperimentConfig& c, const std::string& v) { c.algorithm = bandit::parse_algorithm(v); },
                      [](const ExperimentConfig& c) { return std::string(bandit::algorithm_name(c.algorithm)); }};
    f["slots"] = {[](ExperimentConfig& c, const std::string& v) { c.instance.slots = to_u64(v); },
                  [](const ExperimentConfig& c) { return from_u64(c.instance.slots); }};
    f["dim"] = {[](ExperimentConfig& c, const std::string& v) { c.instance.dim = to_u64(v); },
                [](const ExperimentConfig& c) { return from_u64(c.instance.dim); }};
    f["items"] = {[](ExperimentConfig& c, const std::string& v) { c.instance.items = to_u64(v); },
                  [](const ExperimentConfig& c) { return from_u64(c.instance.items); }};
    f["contexts"] = {[](ExperimentConfig& c, const std::string& v) { c.instance.contexts = to_u64(v); },
                     [](const ExperimentConfig& c) { return from_u64(c.instance.contexts); }};
    f["context_mode"] = {
        [](ExperimentConfig& c, const std::string& v) { c.instance.mode = env::parse_context_mode(v); },
        [](const ExperimentConfig& c) { return std::string(env::context_mode_name(c.instance.mode)); }};
    f["item_style"] = {
        [](ExperimentConfig& c, const std::string& v) { c.instance.norm_style = env::parse_norm_style(v); },
        [](const ExperimentConfig& c) { return std::string(env::norm_style_name(c.instance.norm_style)); }};
    f["theta_style"] = {
        [](ExperimentConfig& c, const std::string& v) { c.instance.theta_style = env::parse_theta_style(v); },
        [](const ExperimentConfig& c) { return std::string(env::theta_style_name(c.instance.theta_style)); }};
    f["s_mode"] = {[](ExperimentConfig& c, const std::string& v) {
                     if (v == "exact") c.s_mode = SMode::kExact;
                     else if (v == "bound") c.s_mode = SMode::kBound;
                     else throw std::invalid_argument("expected exact or bound, got '" + v + "'");
                   },
                   [](const ExperimentConfig& c) { return std::string(c.s_mode == SMode::kExact ? "exact" : "bound"); }};
    f["s_bound"] = double_field(&ExperimentConfig::s_bound);
    f["rounds"] = size_field(&ExperimentConfig::rounds);
    f["seeds"] = {[](ExperimentConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); },
                  [](const ExperimentConfig& c) {
                    std::string out;
                    for (auto s : c.seeds) out += (out.empty() ? "" : ",") + from_u64(s);
                    return out;
                  }};
    f["instance_seed"] = {[](ExperimentConfig& c, const std::string& v) {
                            if (v == "per-seed") {
                              c.shared_instance = false;
                              c.instance_seed = 0;
                            } else {
                              c.shared_instance = true;
                              c.instance_seed = to_u64(v);
                            }
                          },
                          [](const ExperimentConfig& c) {
                            return c.shared_instance ? from_u64(c.instance_seed) : std::string("per-seed");
                          }};
    f["delta"] = double_field(&ExperimentConfig::delta);
    f["c_eta"] = {[](ExperimentConfig& c, const std::string& v) { c.schedule.c_eta = to_double(v); },
                  [](const ExperimentConfig& c) { return format_number(c.schedule.c_eta); }};
    f["c_gamma"] = {[](ExperimentConfig& c, const std::string& v) { c.schedule.c_gamma = to_double(v); },
                    [](const ExperimentConfig& c) { return format_number(c.schedule.c_gamma); }};
    f["c_beta"] = {[](ExperimentConfig& c, const std::string& v) { c.schedule.c_beta = to_double(v); },
                   [](const ExperimentConfig& c) { return format_number(c.schedule.c_beta); }};
    f["ts_scale"] = {[](ExperimentConfig& c, const std::string& v) {
                       if (v == "sqrt-eta") c.ts_scale = bandit::TsScale::kSqrtEta;
                       else if (v == "eta") c.ts_scale = bandit::TsScale::kEta;
                       else throw std::invalid_argument("expected sqrt-eta or eta, got '" + v + "'");
                     },
                     [](const ExperimentConfig& c) {
                       return std::string(c.ts_scale == bandit::TsScale::kSqrtEta ? "sqrt-eta" : "eta");
                     }};
    f["refresh_interval"] = size_field(&ExperimentConfig::refresh_interval);
    f["rejection_cap"] = size_field(&ExperimentConfig::rejection_cap);
    f["solver_max_iter"] = {[](ExperimentConfig& c, const std::string& v) { c.solver.max_iter = static_cast<int>(to_u64(v)); },
                            [](const ExperimentConfig& c) { return from_u64(static_cast<std::uint64_t>(c.solver.max_iter)); }};
    f["projection_tol"] = {[](ExperimentConfig& c, const std::string& v) { c.solver.projection_tol = to_double(v); },
                           [](const ExperimentConfig& c) { return format_number(c.solver.projection_tol); }};
    f["armijo_shrink"] = {[](ExperimentConfig& c, const std::string& v) { c.solver.armijo_shrink = to_double(v); },
                          [](const ExperimentConfig& c) { return format_number(c.solver.armijo_shrink); }};
    f["armijo_c"] = {[](ExperimentConfig& c, const std::string& v) { c.solver.armijo_c = to_double(v); },
                     [](const ExperimentConfig& c) { return format_number(c.solver.armijo_c); }};
    f["tau"] = size_field(&ExperimentConfig::tau);
    f["tau_factor"] = double_field(&ExperimentConfig::tau_factor);
    f["lambda_reg"] = double_field(&ExperimentConfig::lambda_reg);
    f["enumeration_cap"] = size_field(&ExperimentConfig::enumeration_cap);
    f["eig_every"] = size_field(&ExperimentConfig::eig_every);
    f["sandwich_every"] = size_field(&ExperimentConfig::sandwich_every);
    f["sandwich_from"] = size_field(&ExperimentConfig::sandwich_from);
    f["bench_algorithms"] = {[](ExperimentConfig& c, const std::string& v) {
                               c.bench_algorithms.clear();
                               for (const auto& name : split_commas(v)) c.bench_algorithms.push_back(bandit::parse_algorithm(name));
                             },
                             [](const ExperimentConfig& c) {
                               std::string out;
                               for (auto a : c.bench_algorithms) out += (out.empty() ? "" : ",") + std::string(bandit::algorithm_name(a));
                               return out;
                             }};
    f["bench_discard"] = size_field(&ExperimentConfig::bench_discard);
    f["bench_exclude_warmup"] = bool_field(&ExperimentConfig::bench_exclude_warmup);
    f["threads"] = size_field(&ExperimentConfig::threads);
    f["output_dir"] = {[](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
                       [](const ExperimentConfig& c) { return c.output_dir.string(); }};
    return f;
  }();
  return fields;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config: " + join(problems)), problems_(std::move(problems)) {}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_commas(text)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_u64(item));
      continue;
    }
    const auto lo = to_u64(trim(item.substr(0, dots)));
    const auto hi = to_u64(trim(item.substr(dots + 2)));
    if (hi < lo) throw std::invalid_argument("empty range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto v : parse_seed_list(text)) out.push_back(static_cast<std::size_t>(v));
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) {
      problems.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = schema().find(key);
    if (it == schema().end()) {
      problems.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (!seen.insert(key).second) {
      problems.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    try {
      it->second.set(config, value);
    } catch (const std::exception& e) {
      problems.push_back(where + key + ": " + e.what());
    }
  }
  for (auto& p : validate(config)) problems.push_back(std::move(p));
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path.string() + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> p;
  const auto& in = c.instance;
  if (in.slots == 0) p.push_back("slots must be positive");
  if (in.dim == 0) p.push_back("dim must be positive");
  if (in.items == 0) p.push_back("items must be positive");
  if (in.mode == env::ContextMode::kFiniteContext && in.contexts == 0) p.push_back("contexts must be positive");
  if (c.rounds == 0) p.push_back("rounds must be positive");
  if (c.seeds.empty()) p.push_back("seeds must not be empty");
  if (c.s_mode == SMode::kBound && !(c.s_bound > 0.0)) p.push_back("s_bound must be positive");
  if (!(c.delta > 0.0 && c.delta < 1.0)) p.push_back("delta must lie in (0, 1)");
  if (!(c.schedule.c_eta > 0.0)) p.push_back("c_eta must be positive");
  if (!(c.schedule.c_gamma > 0.0)) p.push_back("c_gamma must be positive");
  if (!(c.schedule.c_beta > 0.0)) p.push_back("c_beta must be positive");
  if (c.refresh_interval <= 0) p.push_back("refresh_interval must be positive");
  if (c.rejection_cap <= 0) p.push_back("rejection_cap must be positive");
  if (c.solver.max_iter <= 0) p.push_back("solver_max_iter must be positive");
  if (!(c.solver.projection_tol > 0.0)) p.push_back("projection_tol must be positive");
  if (!(c.solver.armijo_shrink > 0.0 && c.solver.armijo_shrink < 1.0)) p.push_back("armijo_shrink must lie in (0, 1)");
  if (!(c.solver.armijo_c > 0.0 && c.solver.armijo_c < 1.0)) p.push_back("armijo_c must lie in (0, 1)");
  if (!(c.tau_factor > 0.0)) p.push_back("tau_factor must be positive");
  if (!(c.lambda_reg > 0.0)) p.push_back("lambda_reg must be positive");
  if (c.enumeration_cap == 0) p.push_back("enumeration_cap must be positive");
  if (c.threads == 0) p.push_back("threads must be positive");
  if (c.bench_algorithms.empty()) p.push_back("bench_algorithms must not be empty");
  if (c.algorithm == bandit::Algorithm::kSlateGlmTsFixed && in.mode != env::ContextMode::kFixedArm) {
    p.push_back("slate-glm-ts-fixed requires context_mode = fixed");
  }
  if (bandit::is_baseline(c.algorithm) && in.slots > 0 && in.items > 0) {
    double count = 1.0;
    for (std::size_t i = 0; i < in.slots; ++i) count *= static_cast<double>(in.items);
    if (count > static_cast<double>(c.enumeration_cap)) {
      p.push_back("baseline needs " + format_number(count) + " slates, above enumeration_cap " +
                  from_u64(c.enumeration_cap));
    }
  }
  return p;
}

std::string canonical_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [key, field] : schema()) out += key + " = " + field.get(config) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::size_t resolved_tau(const ExperimentConfig& config) {
  if (config.tau > 0) return config.tau;
  const double nd = static_cast<double>(config.instance.slots * config.instance.dim);
  const double t = std::max<double>(2.0, static_cast<double>(config.rounds));
  return static_cast<std::size_t>(std::ceil(config.tau_factor * nd * std::log(t)));
}

}  // namespace slateglm::harness
