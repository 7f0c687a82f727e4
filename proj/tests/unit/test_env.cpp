#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "slateglm/env.hpp"
#include "slateglm/glm.hpp"

using namespace slateglm;
using namespace slateglm::env;

TEST(Items, BoxNormalizedHasExactNorm) {
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) EXPECT_NEAR(linalg::norm(sample_item(5, 0.4, NormStyle::kBoxNormalized, rng)), 0.4, 1e-12);
}

TEST(Items, BallUniformVolumeRatio) {
  Rng rng(2);
  const double r = 0.7;
  int inner = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const double nrm = linalg::norm(sample_item(3, r, NormStyle::kBallUniform, rng));
    ASSERT_LE(nrm, r + 1e-12);
    inner += nrm <= r / 2 ? 1 : 0;
  }
  EXPECT_NEAR(double(inner) / n, 0.125, 0.01);
}

TEST(ThetaStar, NormalizedAndCentered) {
  Rng rng(3);
  EXPECT_NEAR(linalg::norm(gen_theta_star(15, ThetaStyle::kUnitNorm, rng)), 1.0, 1e-12);
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const auto t = gen_theta_star(1, ThetaStyle::kUniformBox, rng);
    ASSERT_GE(t[0], -1.0);
    ASSERT_LT(t[0], 1.0);
    sum += t[0];
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
}

TEST(Instance, ReproducibleAndConsistent) {
  const InstanceSpec spec;
  const auto a = make_instance(spec, 5), b = make_instance(spec, 5);
  EXPECT_EQ(a.theta_star, b.theta_star);
  EXPECT_EQ(a.theta_star.size(), 15u);
  EXPECT_DOUBLE_EQ(a.s, linalg::norm(a.theta_star));
  EXPECT_DOUBLE_EQ(a.item_radius, 1.0 / std::sqrt(3.0));
  EXPECT_NE(make_instance(spec, 6).theta_star, a.theta_star);
}

TEST(Environment, FixedArmRepeatsSets) {
  InstanceSpec spec;
  spec.mode = ContextMode::kFixedArm;
  Environment e(make_instance(spec, 1), 2);
  const auto first = e.gen_itemsets(1);
  EXPECT_EQ(e.gen_itemsets(2), first);
  // Same instance, other run seed: same fixed family.
  Environment other(make_instance(spec, 1), 3);
  EXPECT_EQ(other.gen_itemsets(1), first);
}

TEST(Environment, InfiniteContextFreshAndBounded) {
  InstanceSpec spec;
  Environment e(make_instance(spec, 1), 2);
  const auto a = e.gen_itemsets(1);
  const auto b = e.gen_itemsets(2);
  EXPECT_NE(a, b);
  for (int t = 3; t < 200; ++t) {
    const auto& sets = e.gen_itemsets(t);
    ASSERT_EQ(sets.size(), 3u);
    for (const auto& s : sets) ASSERT_EQ(s.size(), 5u);
    const Slate x(sets, {0, 1, 2});
    ASSERT_LE(linalg::norm(x.flat()), 1.0 + 1e-9);
  }
  EXPECT_DOUBLE_EQ(e.max_slate_norm(), 1.0);
}

TEST(Environment, ContextsIndependentOfRewardDraws) {
  InstanceSpec spec;
  const auto inst = make_instance(spec, 4);
  Environment a(inst, 9), b(inst, 9);
  for (int t = 1; t <= 20; ++t) {
    const auto& sa = a.gen_itemsets(t);
    const auto& sb = b.gen_itemsets(t);
    ASSERT_EQ(sa, sb);
    // Only one environment draws rewards.
    a.sample_reward(Slate(sa, {0, 0, 0}));
  }
}

TEST(Environment, FiniteContextHistogramUniform) {
  InstanceSpec spec;
  spec.mode = ContextMode::kFiniteContext;
  spec.contexts = 5;
  Environment e(make_instance(spec, 1), 2);
  std::vector<int> counts(5, 0);
  const int n = 10000;
  for (int t = 1; t <= n; ++t) {
    e.gen_itemsets(t);
    ++counts[e.last_context()];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 5.0) * (c - n / 5.0) / (n / 5.0);
  EXPECT_LT(chi2, 18.47);  // 0.999 quantile, 4 degrees of freedom
}

TEST(Environment, MaxSlateNormForFixedFamilies) {
  InstanceSpec spec;
  spec.mode = ContextMode::kFixedArm;
  Environment e(make_instance(spec, 7), 1);
  const auto sets = e.gen_itemsets(1);
  double sq = 0.0;
  for (const auto& s : sets) {
    double m = 0.0;
    for (const auto& x : s) m = std::max(m, linalg::dot(x, x));
    sq += m;
  }
  EXPECT_DOUBLE_EQ(e.max_slate_norm(), std::sqrt(sq));
}

TEST(Rewards, ZeroThetaIsFairCoin) {
  Rng rng(5);
  const SlotItemSets sets{{{0.3, 0.1}}, {{-0.2, 0.4}}};
  const Slate x(sets, {0, 0});
  const Vector zero(4, 0.0);
  int ones = 0;
  for (int k = 0; k < 100000; ++k) ones += sample_reward(x, zero, rng);
  EXPECT_NEAR(ones / 1e5, 0.5, 0.01);
}

TEST(Rewards, AlignedSlateFollowsMu) {
  Rng rng(6);
  const SlotItemSets sets{{{1.0, 0.0}}};
  const Slate x(sets, {0});
  const Vector theta{1.5, 0.0};
  int ones = 0;
  for (int k = 0; k < 100000; ++k) ones += sample_reward(x, theta, rng);
  EXPECT_NEAR(ones / 1e5, glm::mu(1.5), 0.005);
  Rng a(7), b(7);
  for (int k = 0; k < 100; ++k) ASSERT_EQ(sample_reward(x, theta, a), sample_reward(x, theta, b));
}

TEST(Optimal, ZeroThetaPicksFirst) {
  Rng rng(8);
  SlotItemSets sets(2);
  for (auto& s : sets)
    for (int k = 0; k < 4; ++k) s.push_back(sample_item(2, 0.5, NormStyle::kBallUniform, rng));
  EXPECT_EQ(optimal_slate(sets, Vector(4, 0.0)).indices(), (std::vector<std::size_t>{0, 0}));
}

TEST(Optimal, MatchesEnumerationAndScaleInvariant) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    SlotItemSets sets(2);
    for (auto& s : sets)
      for (int k = 0; k < 4; ++k) s.push_back(sample_item(3, 0.7, NormStyle::kBallUniform, rng));
    const auto theta = gen_theta_star(6, ThetaStyle::kUniformBox, rng);
    const auto best = oracle::brute_force_argmax(sets, [&](const std::vector<std::size_t>& idx) {
      return oracle::logistic(linalg::dot(Slate(sets, idx).flat(), theta));
    });
    const auto opt = optimal_slate(sets, theta);
    EXPECT_EQ(opt.indices(), best);
    Vector scaled = theta;
    for (double& v : scaled) v *= 3.7;
    EXPECT_EQ(optimal_slate(sets, scaled).indices(), best);
  }
}

TEST(Regret, Examples) {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    SlotItemSets sets(2);
    for (auto& s : sets)
      for (int k = 0; k < 3; ++k) s.push_back(sample_item(2, 0.7, NormStyle::kBallUniform, rng));
    const auto theta = gen_theta_star(4, ThetaStyle::kUniformBox, rng);
    const Slate chosen(sets, {rng.uniform_index(3), rng.uniform_index(3)});
    double best = 0.0;
    for (const auto& idx : oracle::index_tuples({3, 3})) best = std::max(best, oracle::logistic(linalg::dot(Slate(sets, idx).flat(), theta)));
    const double r = regret_increment(chosen, sets, theta);
    EXPECT_GE(r, 0.0);
    EXPECT_NEAR(r, best - oracle::logistic(linalg::dot(chosen.flat(), theta)), 1e-12);
    EXPECT_EQ(regret_increment(optimal_slate(sets, theta), sets, theta), 0.0);
    EXPECT_EQ(regret_increment(chosen, sets, Vector(4, 0.0)), 0.0);
  }
}

TEST(Parse, EnumNames) {
  EXPECT_EQ(parse_context_mode("finite"), ContextMode::kFiniteContext);
  EXPECT_EQ(parse_norm_style("box"), NormStyle::kBoxNormalized);
  EXPECT_EQ(parse_theta_style("normalized"), ThetaStyle::kUnitNorm);
  EXPECT_THROW(parse_context_mode("endless"), std::invalid_argument);
}
