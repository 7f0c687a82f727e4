#pragma once

// Logistic link, cross-entropy loss, and the scalar schedules that size the
// confidence sets and exploration bonuses.

#include <cstddef>

namespace slateglm::glm {

/// Logistic function 1 / (1 + exp(-z)). Throws std::domain_error for non-finite z.
double mu(double z);
/// First derivative mu(z) (1 - mu(z)), in (0, 1/4].
double dmu(double z);
/// Second derivative dmu(z) (1 - 2 mu(z)).
double ddmu(double z);

struct LossValue {
  double value = 0.0;
  double grad = 0.0;  ///< d/dz
};

/// Cross-entropy -y log mu(z) - (1 - y) log(1 - mu(z)), evaluated through
/// log1p(exp(.)) so neither branch overflows. Gradient is mu(z) - y.
LossValue xent_loss(double z, int y);

/// Largest value of 1 / dmu(x^T theta) over ||theta|| <= s and ||x|| <= max_slate_norm.
double kappa_bound(double s, double max_slate_norm);

/// Both self-concordance inequalities of the logistic link at (z1, z2):
/// dmu(z1) <= dmu(z2) exp(|z1 - z2|) and the same with the roles swapped.
bool self_concordance_check(double z1, double z2);

struct ScheduleConstants {
  double c_eta = 1.0;
  double c_gamma = 1.0;
  double c_beta = 1.0;
};

/// eta_t = c_eta S^2 N d log(t / delta), gamma_t = c_gamma S^2 N d log(t / delta),
/// beta_t = c_beta S^6 N d log(t / delta).
class ScalarSchedule {
 public:
  ScalarSchedule() = default;
  ScalarSchedule(ScheduleConstants constants, double s, std::size_t slots, std::size_t dim, double delta);

  double eta(double t) const { return eta_scale_ * log_term(t); }
  double gamma(double t) const { return gamma_scale_ * log_term(t); }
  double beta(double t) const { return beta_scale_ * log_term(t); }

  /// log(t / delta); t >= 1.
  double log_term(double t) const;
  double delta() const { return delta_; }
  const ScheduleConstants& constants() const { return constants_; }
  /// True when beta(t) >= gamma(t) for all t, i.e. c_beta S^6 >= c_gamma S^2.
  bool beta_dominates_gamma() const { return beta_dominates_gamma_; }

 private:
  ScheduleConstants constants_{};
  double delta_ = 0.05;
  double eta_scale_ = 0.0;
  double gamma_scale_ = 0.0;
  double beta_scale_ = 0.0;
  bool beta_dominates_gamma_ = true;
};

}  // namespace slateglm::glm
