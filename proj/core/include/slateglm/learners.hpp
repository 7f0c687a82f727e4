#pragma once

// Round-level learners behind one pull/update interface, so the harness can
// time selection and learning separately.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "slateglm/bandit.hpp"

namespace slateglm::bandit {

enum class Algorithm {
  kSlateGlmOfu,
  kSlateGlmTs,
  kSlateGlmTsFixed,
  kBaselineOfu,
  kBaselineTs,
  kRandom,
};

std::string_view algorithm_name(Algorithm a);
/// Parses the CLI/config spelling ("slate-glm-ofu", ...). Throws std::invalid_argument.
Algorithm parse_algorithm(std::string_view name);
bool is_baseline(Algorithm a);

class Learner {
 public:
  virtual ~Learner() = default;
  virtual Algorithm algorithm() const = 0;
  /// Chooses this round's slate.
  virtual Slate pull(const SlotItemSets& itemsets) = 0;
  /// Learns from the reward of the slate returned by the preceding pull.
  /// Returns true when the round went to the warm-up set.
  virtual bool update(const Slate& slate, int reward) = 0;
  /// Rejection draws spent by the last pull (Thompson learners).
  virtual int last_rejections() const { return 0; }
  virtual bool last_rejection_exhausted() const { return false; }
  /// Learner memory for diagnostics; null for memoryless policies.
  virtual const OnlineState* state() const { return nullptr; }
};

class SlateGlmOfu final : public Learner {
 public:
  explicit SlateGlmOfu(const LearnerConfig& config);
  Algorithm algorithm() const override { return Algorithm::kSlateGlmOfu; }
  Slate pull(const SlotItemSets& itemsets) override;
  bool update(const Slate& slate, int reward) override;
  const OnlineState* state() const override { return &state_; }

 private:
  OnlineState state_;
};

class SlateGlmTs final : public Learner {
 public:
  SlateGlmTs(const LearnerConfig& config, std::uint64_t seed);
  Algorithm algorithm() const override { return Algorithm::kSlateGlmTs; }
  Slate pull(const SlotItemSets& itemsets) override;
  bool update(const Slate& slate, int reward) override;
  int last_rejections() const override { return last_.attempts > 0 ? last_.attempts - (last_.exhausted ? 0 : 1) : 0; }
  bool last_rejection_exhausted() const override { return last_.exhausted; }
  const OnlineState* state() const override { return &state_; }

 private:
  LearnerConfig config_;
  OnlineState state_;
  Rng rng_;
  PerturbResult last_;
};

/// Fixed-arm Thompson learner with an explicit warm-up phase: rounds 1..tau
/// pick the least explored item per slot and feed a ridge MLE whose
/// confidence ellipsoid becomes the admissible set; later rounds perturb,
/// select per slot, and take the proximal online step with fresh designs.
class SlateGlmTsFixed final : public Learner {
 public:
  SlateGlmTsFixed(const LearnerConfig& config, std::size_t tau, double lambda_reg, std::uint64_t seed);
  Algorithm algorithm() const override { return Algorithm::kSlateGlmTsFixed; }
  Slate pull(const SlotItemSets& itemsets) override;
  bool update(const Slate& slate, int reward) override;
  int last_rejections() const override { return last_.attempts > 0 ? last_.attempts - (last_.exhausted ? 0 : 1) : 0; }
  bool last_rejection_exhausted() const override { return last_.exhausted; }
  const OnlineState* state() const override { return &state_; }

  std::size_t tau() const { return tau_; }
  bool in_warmup_phase() const { return round_ <= tau_; }
  const std::vector<MaintainedPsd>& warmup_slot_metrics() const { return warmup_slot_metrics_; }
  const SymMatrix& warmup_metric() const { return warmup_metric_; }

 private:
  void finish_warmup();

  LearnerConfig config_;
  std::size_t tau_;
  double lambda_reg_;
  std::size_t round_ = 1;
  OnlineState state_;
  Rng rng_;
  PerturbResult last_;
  SymMatrix warmup_metric_;
  std::vector<MaintainedPsd> warmup_slot_metrics_;
  std::vector<optim::Observation> warmup_data_;
};

/// Slate-level optimism over the enumerated product set.
class BaselineOfu final : public Learner {
 public:
  BaselineOfu(const LearnerConfig& config, std::size_t enumeration_cap);
  Algorithm algorithm() const override { return Algorithm::kBaselineOfu; }
  Slate pull(const SlotItemSets& itemsets) override;
  bool update(const Slate& slate, int reward) override;
  const OnlineState* state() const override { return &state_; }

 private:
  OnlineState state_;
  std::size_t cap_;
  SlotItemSets cached_sets_;
  std::vector<Slate> cached_slates_;
};

/// Slate-level Thompson sampling over the enumerated product set.
class BaselineTs final : public Learner {
 public:
  BaselineTs(const LearnerConfig& config, std::size_t enumeration_cap, std::uint64_t seed);
  Algorithm algorithm() const override { return Algorithm::kBaselineTs; }
  Slate pull(const SlotItemSets& itemsets) override;
  bool update(const Slate& slate, int reward) override;
  int last_rejections() const override { return last_rejections_; }
  bool last_rejection_exhausted() const override { return last_exhausted_; }
  const OnlineState* state() const override { return &state_; }

 private:
  LearnerConfig config_;
  OnlineState state_;
  std::size_t cap_;
  Rng rng_;
  SlotItemSets cached_sets_;
  std::vector<Slate> cached_slates_;
  int last_rejections_ = 0;
  bool last_exhausted_ = false;
};

/// Uniformly random item per slot.
class RandomPolicy final : public Learner {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  Algorithm algorithm() const override { return Algorithm::kRandom; }
  Slate pull(const SlotItemSets& itemsets) override;
  bool update(const Slate&, int) override { return false; }

 private:
  Rng rng_;
};

/// Slate-level argmax of x^T theta + bonus ||x||_{W^{-1}} over enumerated slates.
std::size_t baseline_ofu_argmax(const OnlineState& state, const std::vector<Slate>& slates, double bonus_weight);
/// Slate-level argmax of <x, theta_tilde> over enumerated slates.
std::size_t baseline_linear_argmax(std::span<const double> theta_tilde, const std::vector<Slate>& slates);

struct LearnerOptions {
  LearnerConfig config;
  std::uint64_t seed = 0;
  std::size_t tau = 0;
  double lambda_reg = 1.0;
  std::size_t enumeration_cap = 200000;
};

std::unique_ptr<Learner> make_learner(Algorithm algorithm, const LearnerOptions& options);

using RewardFn = std::function<int(const Slate&)>;

struct StepRecord {
  Slate slate;
  int reward = 0;
  std::int64_t pull_ns = 0;
  std::int64_t update_ns = 0;
  bool warmup = false;
  int rejections = 0;
  bool rejection_exhausted = false;
};

/// One round: timed pull, reward, timed update. The two timed windows are disjoint.
StepRecord step(Learner& learner, const SlotItemSets& itemsets, const RewardFn& reward);

}  // namespace slateglm::bandit
