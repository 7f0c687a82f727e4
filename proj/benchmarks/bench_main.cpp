#include <benchmark/benchmark.h>

#include <cmath>

#include "slateglm/bandit.hpp"
#include "slateglm/env.hpp"
#include "slateglm/learners.hpp"
#include "slateglm/linalg.hpp"
#include "slateglm/optim.hpp"

namespace {

using namespace slateglm;

SlotItemSets make_sets(std::size_t slots, std::size_t dim, std::size_t items, std::uint64_t seed) {
  Rng rng(seed);
  SlotItemSets sets(slots);
  const double r = 1.0 / std::sqrt(static_cast<double>(slots));
  for (auto& set : sets)
    for (std::size_t k = 0; k < items; ++k) set.push_back(env::sample_item(dim, r, env::NormStyle::kBallUniform, rng));
  return sets;
}

bandit::LearnerConfig learner_config(std::size_t slots, std::size_t dim) {
  bandit::LearnerConfig c;
  c.slots = slots;
  c.dim = dim;
  c.s = 2.0;
  c.kappa = glm::kappa_bound(c.s, 1.0);
  return c;
}

// K = 7, d = 5: slot-level pull as N grows.
void BM_SlotLevelPull(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto sets = make_sets(n, 5, 7, 1);
  bandit::SlateGlmOfu learner(learner_config(n, 5));
  for (auto _ : state) benchmark::DoNotOptimize(learner.pull(sets));
}
BENCHMARK(BM_SlotLevelPull)->DenseRange(3, 6)->Unit(benchmark::kMicrosecond);

// Same geometry, slate-level pull over the enumerated product set (fresh enumeration each call).
void BM_EnumerationPull(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto sets = make_sets(n, 5, 7, 1);
  const auto st = bandit::OnlineState::initial(learner_config(n, 5));
  for (auto _ : state) {
    const auto slates = enumerate_slates(sets, 1'000'000);
    benchmark::DoNotOptimize(bandit::baseline_ofu_argmax(st, slates, 1.0));
  }
}
BENCHMARK(BM_EnumerationPull)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_Rank1Update(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  auto m = linalg::MaintainedPsd::identity(dim, 256);
  Rng rng(3);
  linalg::Vector v(dim);
  for (auto _ : state) {
    for (double& x : v) x = rng.normal() / std::sqrt(static_cast<double>(dim));
    m.rank1_update(v, 0.2);
  }
}
BENCHMARK(BM_Rank1Update)->Arg(5)->Arg(15)->Arg(30);

void BM_SolvePenalized(benchmark::State& state) {
  const auto nd = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  optim::PenalizedObjective obj;
  obj.anchor.assign(nd, 0.1);
  obj.anchor_metric = linalg::SymMatrix::identity(nd, 3.0);
  obj.eta_weight = 0.2;
  linalg::Vector x(nd);
  for (double& e : x) e = rng.normal() / std::sqrt(static_cast<double>(nd));
  obj.data_terms.push_back({x, optim::LabelMode::kBoth});
  const auto set = optim::AdmissibleSet::ball(2.0, nd);
  for (auto _ : state) benchmark::DoNotOptimize(optim::solve_penalized(obj, set, 1e-4, {}));
}
BENCHMARK(BM_SolvePenalized)->Arg(15)->Arg(30);

void BM_AdaptiveUpdate(benchmark::State& state) {
  const auto sets = make_sets(3, 5, 5, 9);
  auto st = bandit::OnlineState::initial(learner_config(3, 5));
  const Slate x(sets, {0, 1, 2});
  int y = 0;
  for (auto _ : state) {
    bandit::adaptive_update(st, x, y);
    y ^= 1;
  }
}
BENCHMARK(BM_AdaptiveUpdate)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
