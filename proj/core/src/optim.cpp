#include "slateglm/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slateglm/glm.hpp"

namespace slateglm::optim {

namespace {

double loss_value_for(double z, LabelMode mode) {
  switch (mode) {
    case LabelMode::kZero: return glm::xent_loss(z, 0).value;
    case LabelMode::kOne: return glm::xent_loss(z, 1).value;
    case LabelMode::kBoth: return glm::xent_loss(z, 0).value + glm::xent_loss(z, 1).value;
  }
  return 0.0;
}

double loss_grad_for(double z, LabelMode mode) {
  switch (mode) {
    case LabelMode::kZero: return glm::mu(z);
    case LabelMode::kOne: return glm::mu(z) - 1.0;
    case LabelMode::kBoth: return 2.0 * glm::mu(z) - 1.0;
  }
  return 0.0;
}

double curvature_multiplicity(LabelMode mode) { return mode == LabelMode::kBoth ? 2.0 : 1.0; }

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Projected gradient with Armijo backtracking along the projection arc.
// `eval` fills the gradient and returns the value; `project` maps onto the
// feasible set.
template <typename Eval, typename Project>
SolveReport projected_gradient(Vector start, double lipschitz, double precision,
                               const SolverSettings& settings, Eval&& eval, Project&& project) {
  const double target = std::max(precision, settings.min_precision);
  const double base_step = 1.0 / std::max(lipschitz, 1e-12);
  const std::size_t n = start.size();

  SolveReport report;
  Vector x = project(start);
  Vector grad(n), trial(n), trial_grad(n), point(n);
  double fx = eval(x, grad);
  double last_mapping = std::numeric_limits<double>::infinity();

  for (int it = 0; it < settings.max_iter; ++it) {
    report.iterations = it;
    for (std::size_t i = 0; i < n; ++i) point[i] = x[i] - base_step * grad[i];
    trial = project(point);
    const double mapping = distance(trial, x) / base_step;
    last_mapping = mapping;
    if (mapping <= target) {
      report.theta = std::move(x);
      report.gradient_mapping = mapping;
      return report;
    }

    double step = base_step;
    double ft = eval(trial, trial_grad);
    for (;;) {
      double directional = 0.0;
      for (std::size_t i = 0; i < n; ++i) directional += grad[i] * (trial[i] - x[i]);
      // Absolute slack covers round-off once the decrease is below machine precision.
      const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(fx);
      if (ft <= fx + settings.armijo_c * directional + slack) break;
      step *= settings.armijo_shrink;
      if (step < base_step * 1e-30) {
        throw SolverError("projected gradient: line search failed", mapping);
      }
      for (std::size_t i = 0; i < n; ++i) point[i] = x[i] - step * grad[i];
      trial = project(point);
      ft = eval(trial, trial_grad);
    }
    x.swap(trial);
    grad.swap(trial_grad);
    fx = ft;
  }
  throw SolverError("projected gradient: iteration cap reached (gradient mapping " +
                        std::to_string(last_mapping) + ")",
                    last_mapping);
}

}  // namespace

// ---------------------------------------------------------------------------
// Sets

Ellipsoid::Ellipsoid(Vector center, SymMatrix metric, double radius_sq)
    : center_(std::move(center)), metric_(std::move(metric)), radius_sq_(radius_sq) {
  if (metric_.dim() != center_.size()) throw linalg::DimensionError("Ellipsoid: center/metric dimension mismatch");
  if (!(radius_sq_ > 0.0)) throw std::invalid_argument("Ellipsoid: radius_sq must be positive");
  eigen_ = linalg::eigen_symmetric(metric_);
  if (!(eigen_.values.front() > 0.0)) throw std::invalid_argument("Ellipsoid: metric must be positive definite");
}

double Ellipsoid::distance_sq(std::span<const double> theta) const {
  Vector diff(theta.begin(), theta.end());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= center_[i];
  return linalg::quad_form(diff, metric_);
}

AdmissibleSet AdmissibleSet::ball(double radius, std::size_t dim) {
  if (!(radius > 0.0)) throw std::invalid_argument("AdmissibleSet: radius must be positive");
  AdmissibleSet s;
  s.radius_ = radius;
  s.dim_ = dim;
  return s;
}

AdmissibleSet AdmissibleSet::ball_and_ellipsoid(double radius, Ellipsoid ellipsoid) {
  AdmissibleSet s = ball(radius, ellipsoid.dim());
  s.ellipsoid_.emplace(std::move(ellipsoid));
  return s;
}

double AdmissibleSet::ball_residual(std::span<const double> theta) const {
  return std::max(0.0, linalg::norm(theta) - radius_);
}

double AdmissibleSet::ellipsoid_residual(std::span<const double> theta) const {
  if (!ellipsoid_) return 0.0;
  return std::max(0.0, ellipsoid_->distance_sq(theta) - ellipsoid_->radius_sq());
}

bool AdmissibleSet::contains(std::span<const double> theta, double rel_slack) const {
  if (theta.size() != dim_) throw linalg::DimensionError("AdmissibleSet::contains: dimension mismatch");
  if (linalg::norm(theta) > radius_ * (1.0 + rel_slack)) return false;
  if (ellipsoid_ && ellipsoid_->distance_sq(theta) > ellipsoid_->radius_sq() * (1.0 + rel_slack)) return false;
  return true;
}

double AdmissibleSet::diameter_bound() const {
  double d = 2.0 * radius_;
  if (ellipsoid_) {
    d = std::min(d, 2.0 * std::sqrt(ellipsoid_->radius_sq() / ellipsoid_->eigen().values.front()));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Projections

Vector project_ball(std::span<const double> theta, double radius) {
  Vector out(theta.begin(), theta.end());
  const double nrm = linalg::norm(theta);
  if (nrm > radius) {
    const double scale = radius / nrm;
    for (double& x : out) x *= scale;
  }
  return out;
}

Vector project_ellipsoid(std::span<const double> theta, const Ellipsoid& ell, double tol, int max_iter) {
  const std::size_t n = ell.dim();
  if (theta.size() != n) throw linalg::DimensionError("project_ellipsoid: dimension mismatch");
  if (ell.distance_sq(theta) <= ell.radius_sq()) return Vector(theta.begin(), theta.end());

  const auto& eig = ell.eigen();
  Vector a(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += eig.vector(r, k) * (theta[r] - ell.center()[r]);
    a[k] = s;
  }
  const double beta = ell.radius_sq();
  // g(lambda) = sum v a^2 / (1 + lambda v)^2 - beta is convex and decreasing,
  // so Newton from lambda = 0 climbs monotonically to the root.
  auto g = [&](double lambda, double* deriv) {
    double value = -beta;
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = eig.values[k];
      const double denom = 1.0 + lambda * v;
      const double term = v * a[k] * a[k] / (denom * denom);
      value += term;
      d -= 2.0 * term * v / denom;
    }
    if (deriv) *deriv = d;
    return value;
  };

  double lambda = 0.0;
  double deriv = 0.0;
  double value = g(lambda, &deriv);
  int it = 0;
  while (value > tol * beta) {
    if (++it > max_iter) {
      throw SolverError("project_ellipsoid: root finder did not converge", value / beta);
    }
    const double next = lambda - value / deriv;
    if (!(next > lambda)) break;  // no further progress representable
    lambda = next;
    value = g(lambda, &deriv);
  }
  if (value > tol * beta * 1e3) {
    throw SolverError("project_ellipsoid: root finder stalled", value / beta);
  }

  Vector out(ell.center());
  for (std::size_t k = 0; k < n; ++k) {
    const double y = a[k] / (1.0 + lambda * eig.values[k]);
    for (std::size_t r = 0; r < n; ++r) out[r] += eig.vector(r, k) * y;
  }
  return out;
}

Vector project_ellipsoid(std::span<const double> theta, std::span<const double> center,
                         const SymMatrix& metric, double radius_sq, double tol) {
  const Ellipsoid ell(Vector(center.begin(), center.end()), metric, radius_sq);
  return project_ellipsoid(theta, ell, tol);
}

Vector project_admissible(std::span<const double> theta, const AdmissibleSet& set, double tol, int max_iter) {
  if (theta.size() != set.dim()) throw linalg::DimensionError("project_admissible: dimension mismatch");
  if (!set.has_ellipsoid()) return project_ball(theta, set.radius());
  if (set.contains(theta, 0.0)) return Vector(theta.begin(), theta.end());

  const Ellipsoid& ell = set.ellipsoid();
  const double ball_tol = tol * std::max(1.0, set.radius());
  const double ell_tol = tol * ell.radius_sq();
  auto feasible = [&](std::span<const double> x) {
    return set.ball_residual(x) <= ball_tol && set.ellipsoid_residual(x) <= ell_tol;
  };

  // Projection onto either superset that lands in the other set is already the answer.
  Vector onto_ball = project_ball(theta, set.radius());
  if (set.ellipsoid_residual(onto_ball) <= ell_tol) return onto_ball;
  Vector onto_ell = project_ellipsoid(theta, ell, tol);
  if (set.ball_residual(onto_ell) <= ball_tol) return onto_ell;

  // Dykstra's alternating projections.
  const std::size_t n = theta.size();
  Vector x(theta.begin(), theta.end());
  Vector p(n, 0.0), q(n, 0.0), tmp(n);
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + p[i];
    Vector y = project_ball(tmp, set.radius());
    for (std::size_t i = 0; i < n; ++i) p[i] = tmp[i] - y[i];
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + q[i];
    Vector next = project_ellipsoid(tmp, ell, tol);
    for (std::size_t i = 0; i < n; ++i) q[i] = tmp[i] - next[i];
    const double change = distance(next, x);
    x.swap(next);
    if (change <= tol * (1.0 + linalg::norm(x)) && feasible(x)) return x;
  }
  throw SolverError("project_admissible: Dykstra iteration did not converge", set.ball_residual(x),
                    set.ellipsoid_residual(x));
}

// ---------------------------------------------------------------------------
// Objectives

double objective_value(const PenalizedObjective& obj, std::span<const double> theta) {
  Vector diff(theta.begin(), theta.end());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= obj.anchor[i];
  double value = obj.eta_weight * linalg::quad_form(diff, obj.anchor_metric);
  for (const auto& term : obj.data_terms) value += loss_value_for(linalg::dot(term.x, theta), term.mode);
  return value;
}

Vector objective_gradient(const PenalizedObjective& obj, std::span<const double> theta) {
  Vector diff(theta.begin(), theta.end());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= obj.anchor[i];
  Vector grad = linalg::multiply(obj.anchor_metric, diff);
  for (double& g : grad) g *= 2.0 * obj.eta_weight;
  for (const auto& term : obj.data_terms) {
    const double s = loss_grad_for(linalg::dot(term.x, theta), term.mode);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += s * term.x[i];
  }
  return grad;
}

double mle_value(std::span<const Observation> history, double gamma, std::span<const double> theta) {
  double value = gamma * linalg::dot(theta, theta);
  for (const auto& obs : history) value += glm::xent_loss(linalg::dot(obs.x, theta), obs.y).value;
  return value;
}

Vector mle_gradient(std::span<const Observation> history, double gamma, std::span<const double> theta) {
  Vector grad(theta.begin(), theta.end());
  for (double& g : grad) g *= 2.0 * gamma;
  for (const auto& obs : history) {
    const double s = glm::xent_loss(linalg::dot(obs.x, theta), obs.y).grad;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += s * obs.x[i];
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Solvers

SolveReport solve_penalized(const PenalizedObjective& obj, const AdmissibleSet& set, double precision,
                            const SolverSettings& settings) {
  const std::size_t n = obj.anchor.size();
  if (obj.anchor_metric.dim() != n || set.dim() != n) {
    throw linalg::DimensionError("solve_penalized: dimension mismatch");
  }
  if (!(precision > 0.0)) throw std::invalid_argument("solve_penalized: precision must be positive");
  for (const auto& term : obj.data_terms) {
    if (term.x.size() != n) throw linalg::DimensionError("solve_penalized: data term dimension mismatch");
  }

  const double metric_max = obj.metric_max_eig > 0.0 ? obj.metric_max_eig
                                                      : linalg::max_eigenvalue(obj.anchor_metric);
  double lipschitz = 2.0 * obj.eta_weight * metric_max;
  for (const auto& term : obj.data_terms) {
    lipschitz += 0.25 * curvature_multiplicity(term.mode) * linalg::dot(term.x, term.x);
  }

  Vector diff(n), mv(n);
  auto eval = [&](const Vector& theta, Vector& grad) {
    for (std::size_t i = 0; i < n; ++i) diff[i] = theta[i] - obj.anchor[i];
    linalg::multiply_into(obj.anchor_metric, diff, mv);
    double value = obj.eta_weight * linalg::dot(diff, mv);
    for (std::size_t i = 0; i < n; ++i) grad[i] = 2.0 * obj.eta_weight * mv[i];
    for (const auto& term : obj.data_terms) {
      const double z = linalg::dot(term.x, theta);
      value += loss_value_for(z, term.mode);
      const double s = loss_grad_for(z, term.mode);
      if (s != 0.0)
        for (std::size_t i = 0; i < n; ++i) grad[i] += s * term.x[i];
    }
    return value;
  };
  auto project = [&](const Vector& theta) {
    return project_admissible(theta, set, settings.projection_tol, settings.projection_max_iter);
  };
  return projected_gradient(obj.anchor, lipschitz, precision, settings, eval, project);
}

SolveReport solve_regularized_mle(std::span<const Observation> history, std::size_t dim, double gamma,
                                  double radius, double precision, const SolverSettings& settings) {
  if (!(gamma > 0.0)) throw std::invalid_argument("solve_regularized_mle: gamma must be positive");
  if (!(precision > 0.0)) throw std::invalid_argument("solve_regularized_mle: precision must be positive");
  for (const auto& obs : history) {
    if (obs.x.size() != dim) throw linalg::DimensionError("solve_regularized_mle: observation dimension mismatch");
    if (obs.y != 0 && obs.y != 1) throw std::invalid_argument("solve_regularized_mle: label must be 0 or 1");
  }
  double lipschitz = 2.0 * gamma;
  for (const auto& obs : history) lipschitz += 0.25 * linalg::dot(obs.x, obs.x);

  auto eval = [&](const Vector& theta, Vector& grad) {
    double value = gamma * linalg::dot(theta, theta);
    for (std::size_t i = 0; i < dim; ++i) grad[i] = 2.0 * gamma * theta[i];
    for (const auto& obs : history) {
      const auto loss = glm::xent_loss(linalg::dot(obs.x, theta), obs.y);
      value += loss.value;
      for (std::size_t i = 0; i < dim; ++i) grad[i] += loss.grad * obs.x[i];
    }
    return value;
  };
  auto project = [&](const Vector& theta) { return project_ball(theta, radius); };
  return projected_gradient(Vector(dim, 0.0), lipschitz, precision, settings, eval, project);
}

}  // namespace slateglm::optim
