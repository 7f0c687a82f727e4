#pragma once

// Synthetic slate-bandit environments: item generation, logistic Bernoulli
// rewards, and the exact per-round regret.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "slateglm/rng.hpp"
#include "slateglm/slate.hpp"

namespace slateglm::env {

enum class ContextMode {
  kFixedArm,        ///< one item family for the whole run
  kFiniteContext,   ///< C pre-generated families, one drawn uniformly per round
  kInfiniteContext, ///< fresh items every round
};

enum class NormStyle {
  kBallUniform,    ///< uniform in the radius-r ball
  kBoxNormalized,  ///< uniform in [-1, 1]^d, rescaled to norm exactly r
};

enum class ThetaStyle {
  kUniformBox,  ///< uniform in [-1, 1]^{N d}
  kUnitNorm,    ///< the same, rescaled to norm 1
};

std::string_view context_mode_name(ContextMode m);
ContextMode parse_context_mode(std::string_view s);
std::string_view norm_style_name(NormStyle s);
NormStyle parse_norm_style(std::string_view s);
std::string_view theta_style_name(ThetaStyle s);
ThetaStyle parse_theta_style(std::string_view s);

struct InstanceSpec {
  std::size_t slots = 3;
  std::size_t dim = 5;
  std::size_t items = 5;
  ContextMode mode = ContextMode::kInfiniteContext;
  std::size_t contexts = 5;  ///< C for kFiniteContext
  NormStyle norm_style = NormStyle::kBallUniform;
  ThetaStyle theta_style = ThetaStyle::kUniformBox;
};

struct Instance {
  InstanceSpec spec;
  Vector theta_star;
  double s = 0.0;            ///< ||theta*||
  double item_radius = 0.0;  ///< 1 / sqrt(N)
  std::uint64_t seed = 0;
};

/// A d-vector drawn per the norm style with radius r.
Vector sample_item(std::size_t dim, double radius, NormStyle style, Rng& rng);

/// theta* per the style, drawn from rng.
Vector gen_theta_star(std::size_t flat_dim, ThetaStyle style, Rng& rng);

/// Instance with theta* drawn from the (theta_seed) stream.
Instance make_instance(const InstanceSpec& spec, std::uint64_t theta_seed);

/// Success probability mu(<flat, theta*>).
double reward_probability(const Slate& slate, std::span<const double> theta_star);
int sample_reward(const Slate& slate, std::span<const double> theta_star, Rng& rng);

/// Per-slot argmax of <x, theta*^i>; lowest index on ties.
Slate optimal_slate(const SlotItemSets& itemsets, std::span<const double> theta_star);
/// mu(x*^T theta*) - mu(chosen^T theta*), clamped at 0 against round-off.
double regret_increment(const Slate& chosen, const SlotItemSets& itemsets, std::span<const double> theta_star);

/// Item-set source of one run. Context draws and reward draws use separate
/// streams of the run seed, so two learners on the same seed face the same
/// item sets whatever they choose.
class Environment {
 public:
  Environment(Instance instance, std::uint64_t run_seed);

  const Instance& instance() const { return instance_; }
  /// Item sets of round t (1-based). Rounds must be requested in order.
  const SlotItemSets& gen_itemsets(std::size_t t);
  int sample_reward(const Slate& slate) { return env::sample_reward(slate, instance_.theta_star, reward_rng_); }
  /// Context index used in the last round (FiniteContext), else 0.
  std::size_t last_context() const { return last_context_; }
  /// Largest slate norm over the fixed or pre-generated families; the item radius bound otherwise.
  double max_slate_norm() const;

 private:
  SlotItemSets draw_family();

  Instance instance_;
  Rng context_rng_;
  Rng reward_rng_;
  std::vector<SlotItemSets> families_;
  SlotItemSets current_;
  std::size_t last_context_ = 0;
};

}  // namespace slateglm::env
