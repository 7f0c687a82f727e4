#pragma once

// Flat key = value experiment configuration. Every key has a declared type;
// unknown keys and malformed values are collected and reported together.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "slateglm/env.hpp"
#include "slateglm/learners.hpp"

namespace slateglm::harness {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class SMode {
  kExact,  ///< learners get ||theta*||
  kBound,  ///< learners get max(||theta*||, s_bound)
};

struct ExperimentConfig {
  bandit::Algorithm algorithm = bandit::Algorithm::kSlateGlmOfu;
  env::InstanceSpec instance{};
  SMode s_mode = SMode::kExact;
  double s_bound = 1.0;
  std::size_t rounds = 1000;
  std::vector<std::uint64_t> seeds{1};
  /// Seed of theta* and fixed item families. Unset: each run seed draws its own instance.
  bool shared_instance = false;
  std::uint64_t instance_seed = 0;

  double delta = 0.05;
  glm::ScheduleConstants schedule{};
  bandit::TsScale ts_scale = bandit::TsScale::kSqrtEta;
  int refresh_interval = 256;
  int rejection_cap = 10000;
  optim::SolverSettings solver{};
  /// Warm-up length of slate-glm-ts-fixed; 0 selects ceil(tau_factor * N d * log T).
  std::size_t tau = 0;
  double tau_factor = 5.0;
  double lambda_reg = 1.0;
  std::size_t enumeration_cap = 200000;

  /// Sample lambda_min(W^i_t) every E rounds (0 = off).
  std::size_t eig_every = 0;
  /// Evaluate the U_t / W_t sandwiches every E rounds (0 = off).
  std::size_t sandwich_every = 0;
  /// Rounds from which the (1/2, 3/2) sandwich is required to hold.
  std::size_t sandwich_from = 1000;

  std::vector<bandit::Algorithm> bench_algorithms{bandit::Algorithm::kSlateGlmOfu, bandit::Algorithm::kBaselineOfu};
  std::size_t bench_discard = 10;
  bool bench_exclude_warmup = false;

  std::size_t threads = 1;
  std::filesystem::path output_dir = "runs";
};

/// Parses config text. Throws ConfigError listing every problem found.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Semantic checks (positivity, enumeration feasibility of baselines). Empty when valid.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Every key with its resolved value, in key order; parse_config(canonical_text(c)) == c.
std::string canonical_text(const ExperimentConfig& config);
/// FNV-1a 64 of canonical_text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// tau actually used by slate-glm-ts-fixed.
std::size_t resolved_tau(const ExperimentConfig& config);

/// Comma list of unsigned integers; "a..b" expands inclusively.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace slateglm::harness
