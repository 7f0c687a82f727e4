#pragma once

// Slot-level logistic slate bandit machinery: learner state, per-slot
// optimistic and Thompson selection, and the adaptive update subroutine that
// either takes a cheap online step or grows the warm-up set.

#include <cstddef>
#include <span>
#include <vector>

#include "slateglm/glm.hpp"
#include "slateglm/linalg.hpp"
#include "slateglm/optim.hpp"
#include "slateglm/rng.hpp"
#include "slateglm/slate.hpp"

namespace slateglm::bandit {

using linalg::MaintainedPsd;
using linalg::SymMatrix;

/// Multiplier applied to the Thompson perturbation.
enum class TsScale {
  kSqrtEta,  ///< sqrt(eta_t), standard-deviation scale (default)
  kEta,      ///< raw eta_t
};

struct LearnerConfig {
  std::size_t slots = 1;
  std::size_t dim = 1;
  /// Known bound on ||theta*||. +infinity disables the ball (test mode).
  double s = 1.0;
  double delta = 0.05;
  glm::ScheduleConstants schedule{};
  /// Non-linearity constant used in the warm-up design matrix.
  double kappa = 4.0;
  optim::SolverSettings solver{};
  int refresh_interval = 256;
  int rejection_cap = 10000;
  TsScale ts_scale = TsScale::kSqrtEta;
};

struct OnlineState {
  std::size_t t = 1;  ///< current round, 1-based
  std::size_t slots = 0;
  std::size_t dim = 0;
  Vector theta;                            ///< online estimate, slots*dim
  MaintainedPsd design;                    ///< slate-level W_t
  std::vector<MaintainedPsd> slot_designs; ///< slot-level W^i_t
  std::vector<optim::Observation> warmup;  ///< H_t
  Vector warmup_center;                    ///< theta^H
  SymMatrix warmup_metric;                 ///< V^H
  optim::AdmissibleSet admissible;         ///< Theta_t
  glm::ScalarSchedule schedule;
  double kappa = 4.0;
  double s = 1.0;
  optim::SolverSettings solver{};
  /// Running estimate of lambda_max(design) and its eigenvector, used to size solver steps.
  double design_max_eig = 1.0;
  Vector design_top_vector;

  static OnlineState initial(const LearnerConfig& config);

  std::span<const double> theta_slot(std::size_t i) const { return {theta.data() + i * dim, dim}; }
  std::size_t flat_dim() const { return slots * dim; }
  /// Precision requested from solvers this round: 1/t.
  double precision() const { return 1.0 / static_cast<double>(t); }
  /// 1 / (2 + diam(Theta_t)).
  double eta_weight() const;
  /// Block-diagonal assembly of the slot designs (U_t).
  SymMatrix slot_block_diag() const;
};

struct SelectionResult {
  Slate slate;
  Vector per_slot_scores;
  Vector bonus_terms;
};

/// Per slot, argmax of x^T theta^i + bonus_weight ||x||_{(W^i)^{-1}} (lowest index on ties).
SelectionResult ofu_select(const OnlineState& state, const SlotItemSets& itemsets, double bonus_weight);

/// i.i.d. standard normal vector, the perturbation distribution for Thompson sampling.
Vector dts_sample(std::size_t dim, Rng& rng);

struct PerturbResult {
  Vector theta;        ///< accepted perturbation, or theta_t on exhaustion
  int attempts = 0;    ///< draws made, accepted one included
  bool exhausted = false;
};

/// theta^i + scale (W^i)^{-1/2} eta^i per slot, redrawn until inside Theta_t or `cap` draws.
PerturbResult ts_perturb(const OnlineState& state, Rng& rng, double scale, int cap);

/// Per slot, argmax of <x, theta_tilde^i> (lowest index on ties).
SelectionResult ts_select(std::span<const double> theta_tilde, const SlotItemSets& itemsets);

struct AdaptivityResult {
  bool pass = false;
  double eta_weight = 0.0;
  Vector theta_bar;
  Vector theta_zero;
  Vector theta_one;
  const Vector& theta_for(int y) const { return y == 1 ? theta_one : theta_zero; }
};

/// Solves the three proximal problems at x and evaluates
/// dmu(x^T theta_bar) <= 2 min(dmu(x^T theta^0), dmu(x^T theta^1)).
AdaptivityResult adaptivity_check(const OnlineState& state, const Slate& x);

/// Online branch. theta_{t+1} is the label-y proximal solution, which is the
/// same problem as the label-u solve of the check with u = y, so it is reused.
void online_update(OnlineState& state, const Slate& x, int y, const AdaptivityResult& sols);

/// Warm-up branch: grow H, refit theta^H and V^H, shrink Theta; theta and designs stay.
void warmup_update(OnlineState& state, const Slate& x, int y);

/// Full update subroutine for one round; advances t. Returns true on a warm-up round.
bool adaptive_update(OnlineState& state, const Slate& x, int y);

/// Applies w x x^T to the slate design and each slot design, w = dmu(x^T theta_new).
void add_design_observation(OnlineState& state, const Slate& x, std::span<const double> theta_new);

/// Exploration weight sqrt(eta_t) at the state's round.
double ofu_bonus_weight(const OnlineState& state);
/// Thompson multiplier per the configured scale mode.
double ts_scale(const OnlineState& state, TsScale mode);

}  // namespace slateglm::bandit
