#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "slateglm/env.hpp"
#include "slateglm/learners.hpp"

using namespace slateglm;
using namespace slateglm::bandit;

namespace {

LearnerConfig config(std::size_t n, std::size_t d, double s) {
  LearnerConfig c;
  c.slots = n;
  c.dim = d;
  c.s = s;
  c.kappa = glm::kappa_bound(s, 1.0);
  return c;
}

SlotItemSets fixed_sets(std::size_t n, std::size_t k, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  SlotItemSets sets(n);
  for (auto& s : sets)
    for (std::size_t j = 0; j < k; ++j) s.push_back(env::sample_item(d, 1.0 / std::sqrt(double(n)), env::NormStyle::kBoxNormalized, rng));
  return sets;
}

}  // namespace

TEST(Algorithm, NamesRoundTrip) {
  for (auto a : {Algorithm::kSlateGlmOfu, Algorithm::kSlateGlmTs, Algorithm::kSlateGlmTsFixed, Algorithm::kBaselineOfu,
                 Algorithm::kBaselineTs, Algorithm::kRandom}) {
    EXPECT_EQ(parse_algorithm(algorithm_name(a)), a);
  }
  EXPECT_THROW(parse_algorithm("ucb"), std::invalid_argument);
}

TEST(Baseline, SingleSlateChosen) {
  const auto st = OnlineState::initial(config(2, 2, 1.0));
  const SlotItemSets sets{{{0.1, 0.2}}, {{0.3, 0.1}}};
  const auto slates = enumerate_slates(sets, 10);
  EXPECT_EQ(baseline_ofu_argmax(st, slates, 5.0), 0u);
}

TEST(Baseline, ZeroBonusEqualsPerSlotGreedy) {
  Rng rng(1);
  auto st = OnlineState::initial(config(3, 2, 2.0));
  for (double& v : st.theta) v = rng.uniform(-1, 1);
  const auto sets = fixed_sets(3, 4, 2, 2);
  const auto slates = enumerate_slates(sets, 100);
  const auto k = baseline_ofu_argmax(st, slates, 0.0);
  EXPECT_EQ(slates[k].indices(), ofu_select(st, sets, 0.0).slate.indices());
}

TEST(Baseline, MatchesScoreTable) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto st = OnlineState::initial(config(2, 3, 2.0));
    for (double& v : st.theta) v = rng.uniform(-1, 1);
    for (int k = 0; k < 4; ++k) {
      Vector x(6);
      for (double& e : x) e = rng.normal() * 0.4;
      st.design.rank1_update(x, 0.2);
    }
    const auto sets = fixed_sets(2, 3, 3, 10 + trial);
    const auto slates = enumerate_slates(sets, 100);
    const double w = rng.uniform(0.0, 2.0);
    const auto inv = linalg::SymMatrix::symmetrized(6, oracle::gauss_jordan_inverse(st.design.matrix()));
    std::size_t best = 0;
    double best_v = -1e300;
    for (std::size_t k = 0; k < slates.size(); ++k) {
      const double v = linalg::dot(slates[k].flat(), st.theta) + w * std::sqrt(oracle::dense_quad(slates[k].flat(), inv));
      if (v > best_v) {
        best_v = v;
        best = k;
      }
    }
    EXPECT_EQ(baseline_ofu_argmax(st, slates, w), best);
  }
}

TEST(Learners, RandomPolicyIsUniformPerSlot) {
  RandomPolicy p(4);
  const auto sets = fixed_sets(2, 4, 2, 5);
  std::vector<int> counts(4, 0);
  for (int k = 0; k < 40000; ++k) ++counts[p.pull(sets).indices()[1]];
  for (int c : counts) EXPECT_NEAR(c / 40000.0, 0.25, 0.01);
  EXPECT_EQ(p.state(), nullptr);
}

TEST(Learners, StepTimesAreDisjointAndNonNegative) {
  SlateGlmOfu l(config(2, 2, 1.0));
  const auto sets = fixed_sets(2, 3, 2, 6);
  for (int t = 0; t < 20; ++t) {
    const auto rec = step(l, sets, [](const Slate&) { return 1; });
    EXPECT_GE(rec.pull_ns, 0);
    EXPECT_GE(rec.update_ns, 0);
    EXPECT_EQ(rec.reward, 1);
  }
}

TEST(Learners, BaselineTsDeterministic) {
  const auto sets = fixed_sets(2, 3, 2, 7);
  auto run = [&] {
    BaselineTs l(config(2, 2, 1.0), 100, 99);
    std::vector<std::size_t> picks;
    for (int t = 0; t < 30; ++t) {
      const auto s = l.pull(sets);
      picks.insert(picks.end(), s.indices().begin(), s.indices().end());
      l.update(s, t % 2);
    }
    return picks;
  };
  EXPECT_EQ(run(), run());
}

TEST(TsFixed, ZeroTauRunsWithoutWarmup) {
  SlateGlmTsFixed l(config(2, 2, 1.0), 0, 1.0, 8);
  const auto sets = fixed_sets(2, 3, 2, 9);
  EXPECT_FALSE(l.in_warmup_phase());
  for (int t = 0; t < 20; ++t) {
    const auto s = l.pull(sets);
    EXPECT_FALSE(l.update(s, t % 2));
  }
  EXPECT_FALSE(l.state()->admissible.has_ellipsoid());
}

TEST(TsFixed, PhaseOneExploresAndBuildsEllipsoid) {
  const std::size_t tau = 12;
  SlateGlmTsFixed l(config(2, 3, 1.5), tau, 1.0, 10);
  const auto sets = fixed_sets(2, 4, 3, 11);
  // With V^{H,i} = I the first pick is the largest-norm item per slot.
  const auto first = l.pull(sets);
  for (std::size_t i = 0; i < 2; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 4; ++k)
      if (linalg::norm(sets[i][k]) > linalg::norm(sets[i][best])) best = k;
    EXPECT_EQ(first.indices()[i], best);
  }
  std::vector<double> prev_min(2, 0.0);
  Slate s = first;
  for (std::size_t t = 1; t <= tau; ++t) {
    if (t > 1) s = l.pull(sets);
    EXPECT_TRUE(l.update(s, int(t % 2)));
    if (t < tau) {
      for (std::size_t i = 0; i < 2; ++i) {
        const double m = linalg::min_eigenvalue(l.warmup_slot_metrics()[i].matrix());
        EXPECT_GE(m, prev_min[i] - 1e-12);
        prev_min[i] = m;
      }
    }
  }
  EXPECT_FALSE(l.in_warmup_phase());
  const auto* st = l.state();
  EXPECT_TRUE(st->admissible.has_ellipsoid());
  EXPECT_EQ(st->t, tau + 1);
  EXPECT_EQ(st->design.matrix(), linalg::SymMatrix::identity(6));
  EXPECT_TRUE(st->admissible.contains(st->theta, 1e-6));
  for (int t = 0; t < 10; ++t) {
    const auto x = l.pull(sets);
    EXPECT_FALSE(l.update(x, t % 2));
  }
}

TEST(MakeLearner, BuildsEveryAlgorithm) {
  LearnerOptions o;
  o.config = config(2, 2, 1.0);
  o.tau = 3;
  for (auto a : {Algorithm::kSlateGlmOfu, Algorithm::kSlateGlmTs, Algorithm::kSlateGlmTsFixed, Algorithm::kBaselineOfu,
                 Algorithm::kBaselineTs, Algorithm::kRandom}) {
    const auto l = make_learner(a, o);
    EXPECT_EQ(l->algorithm(), a);
  }
}
