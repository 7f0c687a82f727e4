#include "slateglm/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "slateglm/glm.hpp"

namespace slateglm::env {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::pair<E, std::string_view> (&table)[N], const char* what) {
  for (const auto& [value, name] : table)
    if (name == s) return value;
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view enum_name(E e, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [value, name] : table)
    if (value == e) return name;
  return "unknown";
}

constexpr std::pair<ContextMode, std::string_view> kContextNames[] = {
    {ContextMode::kFixedArm, "fixed"},
    {ContextMode::kFiniteContext, "finite"},
    {ContextMode::kInfiniteContext, "infinite"},
};
constexpr std::pair<NormStyle, std::string_view> kNormNames[] = {
    {NormStyle::kBallUniform, "ball"},
    {NormStyle::kBoxNormalized, "box"},
};
constexpr std::pair<ThetaStyle, std::string_view> kThetaNames[] = {
    {ThetaStyle::kUniformBox, "uniform"},
    {ThetaStyle::kUnitNorm, "normalized"},
};

}  // namespace

std::string_view context_mode_name(ContextMode m) { return enum_name(m, kContextNames); }
ContextMode parse_context_mode(std::string_view s) { return parse_enum(s, kContextNames, "context mode"); }
std::string_view norm_style_name(NormStyle s) { return enum_name(s, kNormNames); }
NormStyle parse_norm_style(std::string_view s) { return parse_enum(s, kNormNames, "item style"); }
std::string_view theta_style_name(ThetaStyle s) { return enum_name(s, kThetaNames); }
ThetaStyle parse_theta_style(std::string_view s) { return parse_enum(s, kThetaNames, "theta style"); }

Vector sample_item(std::size_t dim, double radius, NormStyle style, Rng& rng) {
  Vector x(dim);
  double nrm = 0.0;
  do {
    if (style == NormStyle::kBallUniform) {
      for (double& v : x) v = rng.normal();
    } else {
      for (double& v : x) v = rng.uniform(-1.0, 1.0);
    }
    nrm = linalg::norm(x);
  } while (!(nrm > 0.0));

  double target = radius;
  if (style == NormStyle::kBallUniform) {
    // Radius law of the uniform ball: r U^{1/d}.
    target = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
  }
  for (double& v : x) v *= target / nrm;
  return x;
}

Vector gen_theta_star(std::size_t flat_dim, ThetaStyle style, Rng& rng) {
  Vector theta(flat_dim);
  for (double& v : theta) v = rng.uniform(-1.0, 1.0);
  if (style == ThetaStyle::kUnitNorm) {
    const double nrm = linalg::norm(theta);
    for (double& v : theta) v /= nrm;
  }
  return theta;
}

Instance make_instance(const InstanceSpec& spec, std::uint64_t theta_seed) {
  if (spec.slots == 0 || spec.dim == 0 || spec.items == 0) throw std::invalid_argument("instance: empty geometry");
  if (spec.mode == ContextMode::kFiniteContext && spec.contexts == 0) {
    throw std::invalid_argument("instance: finite-context mode needs at least one context");
  }
  Instance inst;
  inst.spec = spec;
  inst.seed = theta_seed;
  Rng rng(derive_seed(theta_seed, Stream::kTheta));
  inst.theta_star = gen_theta_star(spec.slots * spec.dim, spec.theta_style, rng);
  inst.s = linalg::norm(inst.theta_star);
  inst.item_radius = 1.0 / std::sqrt(static_cast<double>(spec.slots));
  return inst;
}

double reward_probability(const Slate& slate, std::span<const double> theta_star) {
  return glm::mu(linalg::dot(slate.flat(), theta_star));
}

int sample_reward(const Slate& slate, std::span<const double> theta_star, Rng& rng) {
  return rng.bernoulli(reward_probability(slate, theta_star)) ? 1 : 0;
}

Slate optimal_slate(const SlotItemSets& itemsets, std::span<const double> theta_star) {
  const std::size_t d = check_itemsets(itemsets);
  if (theta_star.size() != itemsets.size() * d) throw linalg::DimensionError("optimal_slate: dimension mismatch");
  std::vector<std::size_t> chosen(itemsets.size(), 0);
  for (std::size_t i = 0; i < itemsets.size(); ++i) {
    const auto theta_i = theta_star.subspan(i * d, d);
    double best = linalg::dot(itemsets[i][0], theta_i);
    for (std::size_t k = 1; k < itemsets[i].size(); ++k) {
      const double score = linalg::dot(itemsets[i][k], theta_i);
      if (score > best) {
        best = score;
        chosen[i] = k;
      }
    }
  }
  return Slate(itemsets, std::move(chosen));
}

double regret_increment(const Slate& chosen, const SlotItemSets& itemsets, std::span<const double> theta_star) {
  const Slate best = optimal_slate(itemsets, theta_star);
  return std::max(0.0, reward_probability(best, theta_star) - reward_probability(chosen, theta_star));
}

// ---------------------------------------------------------------------------

Environment::Environment(Instance instance, std::uint64_t run_seed)
    : instance_(std::move(instance)),
      context_rng_(derive_seed(run_seed, Stream::kContexts)),
      reward_rng_(derive_seed(run_seed, Stream::kRewards)) {
  // Fixed and finite families belong to the instance, shared by every run seed.
  Rng family_rng(derive_seed(instance_.seed, Stream::kContexts, 1));
  const auto& spec = instance_.spec;
  std::size_t families = 0;
  if (spec.mode == ContextMode::kFixedArm) families = 1;
  if (spec.mode == ContextMode::kFiniteContext) families = spec.contexts;
  for (std::size_t c = 0; c < families; ++c) {
    SlotItemSets sets(spec.slots);
    for (auto& set : sets) {
      set.reserve(spec.items);
      for (std::size_t k = 0; k < spec.items; ++k) {
        set.push_back(sample_item(spec.dim, instance_.item_radius, spec.norm_style, family_rng));
      }
    }
    families_.push_back(std::move(sets));
  }
}

SlotItemSets Environment::draw_family() {
  const auto& spec = instance_.spec;
  SlotItemSets sets(spec.slots);
  for (auto& set : sets) {
    set.reserve(spec.items);
    for (std::size_t k = 0; k < spec.items; ++k) {
      set.push_back(sample_item(spec.dim, instance_.item_radius, spec.norm_style, context_rng_));
    }
  }
  return sets;
}

const SlotItemSets& Environment::gen_itemsets(std::size_t /*t*/) {
  switch (instance_.spec.mode) {
    case ContextMode::kFixedArm:
      last_context_ = 0;
      return families_.front();
    case ContextMode::kFiniteContext:
      last_context_ = context_rng_.uniform_index(families_.size());
      return families_[last_context_];
    case ContextMode::kInfiniteContext:
      current_ = draw_family();
      return current_;
  }
  throw std::logic_error("Environment: unknown context mode");
}

double Environment::max_slate_norm() const {
  if (families_.empty()) {
    return std::min(1.0, instance_.item_radius * std::sqrt(static_cast<double>(instance_.spec.slots)));
  }
  double best = 0.0;
  for (const auto& family : families_) {
    double sq = 0.0;
    for (const auto& set : family) {
      double m = 0.0;
      for (const auto& item : set) m = std::max(m, linalg::dot(item, item));
      sq += m;
    }
    best = std::max(best, std::sqrt(sq));
  }
  return std::min(1.0, best);
}

}  // namespace slateglm::env
