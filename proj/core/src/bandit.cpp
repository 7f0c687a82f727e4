#include "slateglm/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slateglm::bandit {

namespace {

constexpr int kPowerIterations = 4;
// Rayleigh quotients bound lambda_max from below; a small inflation keeps the
// first solver step from overshooting in the common case.
constexpr double kPowerInflation = 1.02;

void refresh_max_eig(OnlineState& state) {
  const auto& m = state.design.matrix();
  Vector v = state.design_top_vector;
  Vector mv(v.size());
  double rq = state.design_max_eig;
  for (int k = 0; k < kPowerIterations; ++k) {
    linalg::multiply_into(m, v, mv);
    const double nrm = linalg::norm(mv);
    if (!(nrm > 0.0)) break;
    rq = linalg::dot(v, mv);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mv[i] / nrm;
  }
  state.design_top_vector = std::move(v);
  state.design_max_eig = std::max(rq, 1.0) * kPowerInflation;
}

optim::PenalizedObjective proximal_objective(const OnlineState& state, const Slate& x, optim::LabelMode mode,
                                             double eta_weight) {
  optim::PenalizedObjective obj;
  obj.anchor = state.theta;
  obj.anchor_metric = state.design.matrix();
  obj.eta_weight = eta_weight;
  obj.data_terms.push_back({x.flat(), mode});
  obj.metric_max_eig = state.design_max_eig;
  return obj;
}

void check_selection_input(const SlotItemSets& itemsets, std::size_t slots, std::size_t dim) {
  if (itemsets.size() != slots) throw std::invalid_argument("selection: slot count mismatch");
  if (check_itemsets(itemsets) != dim) throw linalg::DimensionError("selection: item dimension mismatch");
}

}  // namespace

OnlineState OnlineState::initial(const LearnerConfig& config) {
  if (config.slots == 0 || config.dim == 0) throw std::invalid_argument("OnlineState: empty geometry");
  OnlineState st;
  st.slots = config.slots;
  st.dim = config.dim;
  const std::size_t nd = config.slots * config.dim;
  st.theta.assign(nd, 0.0);
  st.design = MaintainedPsd::identity(nd, config.refresh_interval);
  st.slot_designs.assign(config.slots, MaintainedPsd::identity(config.dim, config.refresh_interval));
  st.warmup_center.assign(nd, 0.0);
  st.s = config.s;
  st.kappa = config.kappa;
  st.solver = config.solver;
  const double schedule_s = std::isfinite(config.s) ? config.s : 1.0;
  st.schedule = glm::ScalarSchedule(config.schedule, schedule_s, config.slots, config.dim, config.delta);
  st.warmup_metric = SymMatrix::identity(nd, st.schedule.gamma(1.0));
  st.admissible = optim::AdmissibleSet::ball(config.s, nd);
  st.design_max_eig = 1.0;
  st.design_top_vector.assign(nd, 1.0 / std::sqrt(static_cast<double>(nd)));
  return st;
}

double OnlineState::eta_weight() const { return 1.0 / (2.0 + admissible.diameter_bound()); }

SymMatrix OnlineState::slot_block_diag() const {
  std::vector<SymMatrix> blocks;
  blocks.reserve(slot_designs.size());
  for (const auto& w : slot_designs) blocks.push_back(w.matrix());
  return linalg::block_diag(blocks);
}

double ofu_bonus_weight(const OnlineState& state) {
  return std::sqrt(state.schedule.eta(static_cast<double>(state.t)));
}

double ts_scale(const OnlineState& state, TsScale mode) {
  const double eta = state.schedule.eta(static_cast<double>(state.t));
  return mode == TsScale::kSqrtEta ? std::sqrt(eta) : eta;
}

SelectionResult ofu_select(const OnlineState& state, const SlotItemSets& itemsets, double bonus_weight) {
  check_selection_input(itemsets, state.slots, state.dim);
  SelectionResult out;
  std::vector<std::size_t> chosen(state.slots, 0);
  out.per_slot_scores.resize(state.slots);
  out.bonus_terms.resize(state.slots);
  for (std::size_t i = 0; i < state.slots; ++i) {
    const auto theta_i = state.theta_slot(i);
    const auto& inv = state.slot_designs[i].inverse();
    double best = -std::numeric_limits<double>::infinity();
    double best_bonus = 0.0;
    for (std::size_t k = 0; k < itemsets[i].size(); ++k) {
      const auto& x = itemsets[i][k];
      const double bonus = bonus_weight == 0.0 ? 0.0 : bonus_weight * linalg::mahalanobis_norm(x, inv);
      const double score = linalg::dot(x, theta_i) + bonus;
      if (score > best) {
        best = score;
        best_bonus = bonus;
        chosen[i] = k;
      }
    }
    out.per_slot_scores[i] = best;
    out.bonus_terms[i] = best_bonus;
  }
  out.slate = Slate(itemsets, std::move(chosen));
  return out;
}

Vector dts_sample(std::size_t dim, Rng& rng) {
  if (dim == 0) throw std::invalid_argument("dts_sample: dimension must be positive");
  Vector v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

PerturbResult ts_perturb(const OnlineState& state, Rng& rng, double scale, int cap) {
  if (!(scale > 0.0)) throw std::invalid_argument("ts_perturb: scale must be positive");
  if (cap <= 0) throw std::invalid_argument("ts_perturb: rejection cap must be positive");
  std::vector<SymMatrix> roots;
  roots.reserve(state.slots);
  for (const auto& w : state.slot_designs) roots.push_back(linalg::inv_sqrt(w.matrix()));

  PerturbResult out;
  Vector candidate(state.flat_dim());
  Vector noise(state.dim), shift(state.dim);
  for (int attempt = 1; attempt <= cap; ++attempt) {
    for (std::size_t i = 0; i < state.slots; ++i) {
      for (double& e : noise) e = rng.normal();
      linalg::multiply_into(roots[i], noise, shift);
      for (std::size_t k = 0; k < state.dim; ++k) {
        candidate[i * state.dim + k] = state.theta[i * state.dim + k] + scale * shift[k];
      }
    }
    if (state.admissible.contains(candidate)) {
      out.theta = std::move(candidate);
      out.attempts = attempt;
      return out;
    }
  }
  out.theta = state.theta;
  out.attempts = cap;
  out.exhausted = true;
  return out;
}

SelectionResult ts_select(std::span<const double> theta_tilde, const SlotItemSets& itemsets) {
  const std::size_t d = check_itemsets(itemsets);
  if (theta_tilde.size() != itemsets.size() * d) throw linalg::DimensionError("ts_select: parameter dimension mismatch");
  SelectionResult out;
  std::vector<std::size_t> chosen(itemsets.size(), 0);
  out.per_slot_scores.resize(itemsets.size());
  out.bonus_terms.assign(itemsets.size(), 0.0);
  for (std::size_t i = 0; i < itemsets.size(); ++i) {
    const auto theta_i = theta_tilde.subspan(i * d, d);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < itemsets[i].size(); ++k) {
      const double score = linalg::dot(itemsets[i][k], theta_i);
      if (score > best) {
        best = score;
        chosen[i] = k;
      }
    }
    out.per_slot_scores[i] = best;
  }
  out.slate = Slate(itemsets, std::move(chosen));
  return out;
}

AdaptivityResult adaptivity_check(const OnlineState& state, const Slate& x) {
  if (x.flat().size() != state.flat_dim()) throw linalg::DimensionError("adaptivity_check: slate dimension mismatch");
  AdaptivityResult r;
  r.eta_weight = state.eta_weight();
  const double precision = state.precision();
  auto solve = [&](optim::LabelMode mode) {
    return optim::solve_penalized(proximal_objective(state, x, mode, r.eta_weight), state.admissible, precision,
                                  state.solver)
        .theta;
  };
  r.theta_bar = solve(optim::LabelMode::kBoth);
  r.theta_zero = solve(optim::LabelMode::kZero);
  r.theta_one = solve(optim::LabelMode::kOne);
  const double lhs = glm::dmu(linalg::dot(x.flat(), r.theta_bar));
  const double rhs = 2.0 * std::min(glm::dmu(linalg::dot(x.flat(), r.theta_zero)),
                                    glm::dmu(linalg::dot(x.flat(), r.theta_one)));
  r.pass = lhs <= rhs;
  return r;
}

void add_design_observation(OnlineState& state, const Slate& x, std::span<const double> theta_new) {
  const double w = glm::dmu(linalg::dot(x.flat(), theta_new));
  state.design.rank1_update(x.flat(), w);
  for (std::size_t i = 0; i < state.slots; ++i) state.slot_designs[i].rank1_update(x.slot(i), w);
  refresh_max_eig(state);
}

void online_update(OnlineState& state, const Slate& x, int y, const AdaptivityResult& sols) {
  if (y != 0 && y != 1) throw std::invalid_argument("online_update: reward must be 0 or 1");
  state.theta = sols.theta_for(y);
  add_design_observation(state, x, state.theta);
}

void warmup_update(OnlineState& state, const Slate& x, int y) {
  if (y != 0 && y != 1) throw std::invalid_argument("warmup_update: reward must be 0 or 1");
  const double t = static_cast<double>(state.t);
  const std::size_t nd = state.flat_dim();
  state.warmup.push_back({x.flat(), y});

  const double gamma = state.schedule.gamma(t);
  state.warmup_center =
      optim::solve_regularized_mle(state.warmup, nd, gamma, state.s, state.precision(), state.solver).theta;

  SymMatrix metric = SymMatrix::identity(nd, gamma);
  for (const auto& obs : state.warmup) metric.add_outer(obs.x, 1.0 / state.kappa);
  state.warmup_metric = metric;

  optim::Ellipsoid ellipsoid(state.warmup_center, std::move(metric), state.schedule.beta(t));
  if (linalg::norm(state.warmup_center) > state.s * (1.0 + optim::AdmissibleSet::kMembershipSlack)) {
    throw std::logic_error("warmup_update: warm-up estimate left the parameter ball; admissible set would be empty");
  }
  state.admissible = optim::AdmissibleSet::ball_and_ellipsoid(state.s, std::move(ellipsoid));
  if (!state.admissible.contains(state.theta)) {
    state.theta = optim::project_admissible(state.theta, state.admissible, state.solver.projection_tol,
                                            state.solver.projection_max_iter);
  }
}

bool adaptive_update(OnlineState& state, const Slate& x, int y) {
  const AdaptivityResult check = adaptivity_check(state, x);
  if (check.pass) {
    online_update(state, x, y, check);
  } else {
    warmup_update(state, x, y);
  }
  ++state.t;
  return !check.pass;
}

}  // namespace slateglm::bandit
