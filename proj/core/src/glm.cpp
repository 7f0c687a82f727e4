#include "slateglm/glm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace slateglm::glm {

namespace {

void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) throw std::domain_error(std::string(what) + ": non-finite argument");
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

double mu(double z) {
  require_finite(z, "mu");
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dmu(double z) {
  require_finite(z, "dmu");
  // e / (1 + e)^2 with e = exp(-|z|) stays positive far into the tails.
  const double e = std::exp(-std::abs(z));
  return e / ((1.0 + e) * (1.0 + e));
}

double ddmu(double z) {
  return dmu(z) * (1.0 - 2.0 * mu(z));
}

LossValue xent_loss(double z, int y) {
  if (y != 0 && y != 1) throw std::invalid_argument("xent_loss: label must be 0 or 1");
  // -log mu(z) = softplus(-z), -log(1 - mu(z)) = softplus(z)
  return {y == 1 ? softplus(-z) : softplus(z), mu(z) - static_cast<double>(y)};
}

double kappa_bound(double s, double max_slate_norm) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("kappa_bound: S must be positive");
  if (!(max_slate_norm > 0.0) || max_slate_norm > 1.0) {
    throw std::invalid_argument("kappa_bound: max slate norm must lie in (0, 1]");
  }
  // dmu decreases in |z|, so the extremum sits at |z| = S * max_slate_norm.
  return 1.0 / dmu(s * max_slate_norm);
}

bool self_concordance_check(double z1, double z2) {
  const double gap = std::exp(std::abs(z1 - z2));
  return dmu(z1) <= dmu(z2) * gap && dmu(z2) <= dmu(z1) * gap;
}

ScalarSchedule::ScalarSchedule(ScheduleConstants constants, double s, std::size_t slots,
                               std::size_t dim, double delta)
    : constants_(constants), delta_(delta) {
  if (!(constants.c_eta > 0.0 && constants.c_gamma > 0.0 && constants.c_beta > 0.0)) {
    throw std::invalid_argument("ScalarSchedule: constants must be positive");
  }
  if (!(s > 0.0)) throw std::invalid_argument("ScalarSchedule: S must be positive");
  if (slots == 0 || dim == 0) throw std::invalid_argument("ScalarSchedule: empty geometry");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("ScalarSchedule: delta must lie in (0, 1)");
  const double nd = static_cast<double>(slots * dim);
  const double s2 = s * s;
  const double s6 = s2 * s2 * s2;
  eta_scale_ = constants.c_eta * s2 * nd;
  gamma_scale_ = constants.c_gamma * s2 * nd;
  beta_scale_ = constants.c_beta * s6 * nd;
  beta_dominates_gamma_ = constants.c_beta * s6 >= constants.c_gamma * s2;
}

double ScalarSchedule::log_term(double t) const {
  if (!(t >= 1.0)) throw std::invalid_argument("ScalarSchedule: round index must be >= 1");
  return std::log(t / delta_);
}

}  // namespace slateglm::glm
