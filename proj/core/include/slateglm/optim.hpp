#pragma once

// Constrained solvers for the penalized logistic objectives. The feasible
// region is always a Euclidean ball, optionally intersected with an
// ellipsoid; the engine is projected gradient descent with Armijo
// backtracking, and projections onto the intersection use Dykstra's
// alternating scheme.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slateglm/linalg.hpp"

namespace slateglm::optim {

using linalg::SymMatrix;
using linalg::Vector;

struct SolverSettings {
  double armijo_shrink = 0.5;
  double armijo_c = 1e-4;
  int max_iter = 10000;
  /// Residual tolerance for projections (relative to the constraint scale).
  double projection_tol = 1e-10;
  int projection_max_iter = 10000;
  int root_max_iter = 200;
  /// Floor applied to any requested precision.
  double min_precision = 1e-9;
};

/// Failure of an iterative routine; carries the last residual it reached.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, double second_residual = 0.0)
      : std::runtime_error(what), residual_(residual), second_residual_(second_residual) {}
  double residual() const { return residual_; }
  double second_residual() const { return second_residual_; }

 private:
  double residual_;
  double second_residual_;
};

/// {theta : (theta - center)^T metric (theta - center) <= radius_sq}, with the
/// eigen-decomposition of the metric cached for fast projections.
class Ellipsoid {
 public:
  Ellipsoid(Vector center, SymMatrix metric, double radius_sq);

  const Vector& center() const { return center_; }
  const SymMatrix& metric() const { return metric_; }
  double radius_sq() const { return radius_sq_; }
  const linalg::EigenDecomposition& eigen() const { return eigen_; }
  std::size_t dim() const { return center_.size(); }

  /// (theta - center)^T metric (theta - center)
  double distance_sq(std::span<const double> theta) const;

 private:
  Vector center_;
  SymMatrix metric_;
  double radius_sq_;
  linalg::EigenDecomposition eigen_;
};

/// Ball of radius S (S may be +infinity), optionally cut by an ellipsoid.
class AdmissibleSet {
 public:
  static constexpr double kMembershipSlack = 1e-9;

  AdmissibleSet() = default;
  static AdmissibleSet ball(double radius, std::size_t dim);
  static AdmissibleSet ball_and_ellipsoid(double radius, Ellipsoid ellipsoid);

  double radius() const { return radius_; }
  std::size_t dim() const { return dim_; }
  bool has_ellipsoid() const { return ellipsoid_.has_value(); }
  const Ellipsoid& ellipsoid() const { return *ellipsoid_; }

  /// ||theta|| - S, clamped at 0.
  double ball_residual(std::span<const double> theta) const;
  /// distance_sq - radius_sq, clamped at 0 (0 without an ellipsoid).
  double ellipsoid_residual(std::span<const double> theta) const;
  /// Membership with relative slack kMembershipSlack (or a caller-supplied one).
  bool contains(std::span<const double> theta, double rel_slack = kMembershipSlack) const;
  /// Upper bound on the diameter: 2S, tightened to 2 sqrt(beta / lambda_min(V)) with an ellipsoid.
  double diameter_bound() const;

 private:
  double radius_ = 0.0;
  std::size_t dim_ = 0;
  std::optional<Ellipsoid> ellipsoid_;
};

Vector project_ball(std::span<const double> theta, double radius);

/// Euclidean projection onto the ellipsoid through monotone root-finding on
/// the Lagrange multiplier. Throws SolverError if the root finder stalls.
Vector project_ellipsoid(std::span<const double> theta, const Ellipsoid& ellipsoid, double tol,
                         int max_iter = 200);
Vector project_ellipsoid(std::span<const double> theta, std::span<const double> center,
                         const SymMatrix& metric, double radius_sq, double tol);

/// Projection onto the admissible set (Dykstra when an ellipsoid is present).
Vector project_admissible(std::span<const double> theta, const AdmissibleSet& set, double tol,
                          int max_iter);

enum class LabelMode { kZero, kOne, kBoth };

struct DataTerm {
  Vector x;
  LabelMode mode = LabelMode::kOne;
};

/// eta ||theta - anchor||^2_W + sum_k loss(<x_k, theta>, label_k)
struct PenalizedObjective {
  Vector anchor;
  SymMatrix anchor_metric;
  double eta_weight = 0.25;
  std::vector<DataTerm> data_terms;
  /// Largest eigenvalue of anchor_metric if the caller already knows it
  /// (an estimate is fine); <= 0 means compute it.
  double metric_max_eig = 0.0;
};

struct Observation {
  Vector x;
  int y = 0;
};

double objective_value(const PenalizedObjective& obj, std::span<const double> theta);
Vector objective_gradient(const PenalizedObjective& obj, std::span<const double> theta);

/// sum loss(<x, theta>, y) + gamma ||theta||^2
double mle_value(std::span<const Observation> history, double gamma, std::span<const double> theta);
Vector mle_gradient(std::span<const Observation> history, double gamma, std::span<const double> theta);

struct SolveReport {
  Vector theta;
  int iterations = 0;
  double gradient_mapping = 0.0;
};

/// Minimizes the penalized objective over the set, starting at the projected
/// anchor, until the gradient-mapping norm is <= max(precision, min_precision).
SolveReport solve_penalized(const PenalizedObjective& obj, const AdmissibleSet& set,
                            double precision, const SolverSettings& settings = {});

/// Minimizes the ridge-regularized cross-entropy over the ball ||theta|| <= S.
SolveReport solve_regularized_mle(std::span<const Observation> history, std::size_t dim, double gamma,
                                  double radius, double precision, const SolverSettings& settings = {});

}  // namespace slateglm::optim
