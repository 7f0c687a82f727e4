#include "slateglm/learners.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace slateglm::bandit {

namespace {

struct AlgorithmName {
  Algorithm algorithm;
  std::string_view name;
};

constexpr AlgorithmName kAlgorithmNames[] = {
    {Algorithm::kSlateGlmOfu, "slate-glm-ofu"},   {Algorithm::kSlateGlmTs, "slate-glm-ts"},
    {Algorithm::kSlateGlmTsFixed, "slate-glm-ts-fixed"}, {Algorithm::kBaselineOfu, "baseline-ofu"},
    {Algorithm::kBaselineTs, "baseline-ts"},       {Algorithm::kRandom, "random"},
};

const std::vector<Slate>& cached_enumeration(const SlotItemSets& itemsets, std::size_t cap, SlotItemSets& cached_sets,
                                             std::vector<Slate>& cached_slates) {
  if (cached_slates.empty() || itemsets != cached_sets) {
    cached_slates = enumerate_slates(itemsets, cap);
    cached_sets = itemsets;
  }
  return cached_slates;
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  for (const auto& entry : kAlgorithmNames)
    if (entry.algorithm == a) return entry.name;
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& entry : kAlgorithmNames)
    if (entry.name == name) return entry.algorithm;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

bool is_baseline(Algorithm a) { return a == Algorithm::kBaselineOfu || a == Algorithm::kBaselineTs; }

// ---------------------------------------------------------------------------

SlateGlmOfu::SlateGlmOfu(const LearnerConfig& config) : state_(OnlineState::initial(config)) {}

Slate SlateGlmOfu::pull(const SlotItemSets& itemsets) {
  return ofu_select(state_, itemsets, ofu_bonus_weight(state_)).slate;
}

bool SlateGlmOfu::update(const Slate& slate, int reward) { return adaptive_update(state_, slate, reward); }

// ---------------------------------------------------------------------------

SlateGlmTs::SlateGlmTs(const LearnerConfig& config, std::uint64_t seed)
    : config_(config), state_(OnlineState::initial(config)), rng_(seed) {}

Slate SlateGlmTs::pull(const SlotItemSets& itemsets) {
  last_ = ts_perturb(state_, rng_, ts_scale(state_, config_.ts_scale), config_.rejection_cap);
  return ts_select(last_.theta, itemsets).slate;
}

bool SlateGlmTs::update(const Slate& slate, int reward) { return adaptive_update(state_, slate, reward); }

// ---------------------------------------------------------------------------

SlateGlmTsFixed::SlateGlmTsFixed(const LearnerConfig& config, std::size_t tau, double lambda_reg, std::uint64_t seed)
    : config_(config), tau_(tau), lambda_reg_(lambda_reg), state_(OnlineState::initial(config)), rng_(seed) {
  if (!(lambda_reg > 0.0)) throw std::invalid_argument("SlateGlmTsFixed: lambda must be positive");
  const std::size_t nd = config.slots * config.dim;
  warmup_metric_ = SymMatrix::identity(nd, lambda_reg);
  warmup_slot_metrics_.assign(config.slots,
                              MaintainedPsd(SymMatrix::identity(config.dim, lambda_reg), config.refresh_interval));
}

Slate SlateGlmTsFixed::pull(const SlotItemSets& itemsets) {
  if (in_warmup_phase()) {
    if (itemsets.size() != config_.slots || check_itemsets(itemsets) != config_.dim) {
      throw linalg::DimensionError("SlateGlmTsFixed: item sets do not match the learner geometry");
    }
    last_ = {};
    std::vector<std::size_t> chosen(config_.slots, 0);
    for (std::size_t i = 0; i < config_.slots; ++i) {
      const auto& inv = warmup_slot_metrics_[i].inverse();
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < itemsets[i].size(); ++k) {
        const double score = linalg::mahalanobis_norm(itemsets[i][k], inv);
        if (score > best) {
          best = score;
          chosen[i] = k;
        }
      }
    }
    return Slate(itemsets, std::move(chosen));
  }
  last_ = ts_perturb(state_, rng_, ts_scale(state_, config_.ts_scale), config_.rejection_cap);
  return ts_select(last_.theta, itemsets).slate;
}

bool SlateGlmTsFixed::update(const Slate& slate, int reward) {
  if (reward != 0 && reward != 1) throw std::invalid_argument("SlateGlmTsFixed: reward must be 0 or 1");
  if (in_warmup_phase()) {
    const double w = 1.0 / config_.kappa;
    warmup_metric_.add_outer(slate.flat(), w);
    for (std::size_t i = 0; i < config_.slots; ++i) warmup_slot_metrics_[i].rank1_update(slate.slot(i), w);
    warmup_data_.push_back({slate.flat(), reward});
    if (round_ == tau_) finish_warmup();
    ++round_;
    return true;
  }
  optim::PenalizedObjective obj;
  obj.anchor = state_.theta;
  obj.anchor_metric = state_.design.matrix();
  obj.eta_weight = state_.eta_weight();
  obj.data_terms.push_back({slate.flat(), reward == 1 ? optim::LabelMode::kOne : optim::LabelMode::kZero});
  obj.metric_max_eig = state_.design_max_eig;
  state_.theta = optim::solve_penalized(obj, state_.admissible, state_.precision(), state_.solver).theta;
  add_design_observation(state_, slate, state_.theta);
  ++state_.t;
  ++round_;
  return false;
}

void SlateGlmTsFixed::finish_warmup() {
  const std::size_t nd = config_.slots * config_.dim;
  const double tau = static_cast<double>(tau_);
  const Vector center =
      optim::solve_regularized_mle(warmup_data_, nd, 0.5 * lambda_reg_, config_.s, 1.0 / tau, config_.solver).theta;
  const double beta = state_.schedule.beta(tau);
  OnlineState fresh = OnlineState::initial(config_);
  fresh.admissible = optim::AdmissibleSet::ball_and_ellipsoid(
      config_.s, optim::Ellipsoid(center, warmup_metric_, beta * beta));
  fresh.theta = center;
  fresh.warmup_center = center;
  fresh.warmup_metric = warmup_metric_;
  fresh.warmup = warmup_data_;
  fresh.t = tau_ + 1;
  state_ = std::move(fresh);
}

// ---------------------------------------------------------------------------

std::size_t baseline_ofu_argmax(const OnlineState& state, const std::vector<Slate>& slates, double bonus_weight) {
  if (slates.empty()) throw std::invalid_argument("baseline: no slates to choose from");
  const auto& inv = state.design.inverse();
  std::size_t best_index = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < slates.size(); ++k) {
    const auto& x = slates[k].flat();
    double score = linalg::dot(x, state.theta);
    if (bonus_weight != 0.0) score += bonus_weight * linalg::mahalanobis_norm(x, inv);
    if (score > best) {
      best = score;
      best_index = k;
    }
  }
  return best_index;
}

std::size_t baseline_linear_argmax(std::span<const double> theta_tilde, const std::vector<Slate>& slates) {
  if (slates.empty()) throw std::invalid_argument("baseline: no slates to choose from");
  std::size_t best_index = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < slates.size(); ++k) {
    const double score = linalg::dot(slates[k].flat(), theta_tilde);
    if (score > best) {
      best = score;
      best_index = k;
    }
  }
  return best_index;
}

BaselineOfu::BaselineOfu(const LearnerConfig& config, std::size_t enumeration_cap)
    : state_(OnlineState::initial(config)), cap_(enumeration_cap) {}

Slate BaselineOfu::pull(const SlotItemSets& itemsets) {
  const auto& slates = cached_enumeration(itemsets, cap_, cached_sets_, cached_slates_);
  return slates[baseline_ofu_argmax(state_, slates, ofu_bonus_weight(state_))];
}

bool BaselineOfu::update(const Slate& slate, int reward) { return adaptive_update(state_, slate, reward); }

BaselineTs::BaselineTs(const LearnerConfig& config, std::size_t enumeration_cap, std::uint64_t seed)
    : config_(config), state_(OnlineState::initial(config)), cap_(enumeration_cap), rng_(seed) {}

Slate BaselineTs::pull(const SlotItemSets& itemsets) {
  const auto& slates = cached_enumeration(itemsets, cap_, cached_sets_, cached_slates_);
  const SymMatrix root = linalg::inv_sqrt(state_.design.matrix());
  const double scale = ts_scale(state_, config_.ts_scale);
  const std::size_t nd = state_.flat_dim();
  Vector candidate(nd), shift(nd);
  last_rejections_ = 0;
  last_exhausted_ = true;
  for (int attempt = 1; attempt <= config_.rejection_cap; ++attempt) {
    const Vector noise = dts_sample(nd, rng_);
    linalg::multiply_into(root, noise, shift);
    for (std::size_t k = 0; k < nd; ++k) candidate[k] = state_.theta[k] + scale * shift[k];
    if (state_.admissible.contains(candidate)) {
      last_exhausted_ = false;
      break;
    }
    ++last_rejections_;
  }
  if (last_exhausted_) candidate = state_.theta;
  return slates[baseline_linear_argmax(candidate, slates)];
}

bool BaselineTs::update(const Slate& slate, int reward) { return adaptive_update(state_, slate, reward); }

// ---------------------------------------------------------------------------

Slate RandomPolicy::pull(const SlotItemSets& itemsets) {
  check_itemsets(itemsets);
  std::vector<std::size_t> chosen(itemsets.size());
  for (std::size_t i = 0; i < itemsets.size(); ++i) chosen[i] = rng_.uniform_index(itemsets[i].size());
  return Slate(itemsets, std::move(chosen));
}

// ---------------------------------------------------------------------------

std::unique_ptr<Learner> make_learner(Algorithm algorithm, const LearnerOptions& options) {
  switch (algorithm) {
    case Algorithm::kSlateGlmOfu: return std::make_unique<SlateGlmOfu>(options.config);
    case Algorithm::kSlateGlmTs: return std::make_unique<SlateGlmTs>(options.config, options.seed);
    case Algorithm::kSlateGlmTsFixed:
      return std::make_unique<SlateGlmTsFixed>(options.config, options.tau, options.lambda_reg, options.seed);
    case Algorithm::kBaselineOfu: return std::make_unique<BaselineOfu>(options.config, options.enumeration_cap);
    case Algorithm::kBaselineTs:
      return std::make_unique<BaselineTs>(options.config, options.enumeration_cap, options.seed);
    case Algorithm::kRandom: return std::make_unique<RandomPolicy>(options.seed);
  }
  throw std::invalid_argument("make_learner: unknown algorithm");
}

StepRecord step(Learner& learner, const SlotItemSets& itemsets, const RewardFn& reward) {
  using Clock = std::chrono::steady_clock;
  StepRecord rec;
  const auto t0 = Clock::now();
  rec.slate = learner.pull(itemsets);
  const auto t1 = Clock::now();
  rec.rejections = learner.last_rejections();
  rec.rejection_exhausted = learner.last_rejection_exhausted();
  rec.reward = reward(rec.slate);
  const auto t2 = Clock::now();
  rec.warmup = learner.update(rec.slate, rec.reward);
  const auto t3 = Clock::now();
  rec.pull_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  rec.update_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t3 - t2).count();
  return rec;
}

}  // namespace slateglm::bandit
