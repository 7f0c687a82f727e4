#pragma once

// Small dense symmetric matrices for the per-round hot path. Dimensions here
// are the slot dimension d and the slate dimension N*d, i.e. tens, so
// everything is plain row-major storage and O(n^3) algorithms.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace slateglm::linalg {

using Vector = std::vector<double>;

/// Numerical tolerances shared by the whole library.
struct Tolerances {
  /// PSD check: min eigenvalue >= -psd_eig * dim.
  double psd_eig = 1e-8;
  /// ||M * M^{-1} - I||_F / dim for a maintained inverse.
  double inverse_residual = 1e-7;
  /// Full re-inversion of a maintained inverse every this many updates.
  int refresh_interval = 256;
  /// Cyclic Jacobi: stop when off-diagonal mass <= jacobi_eps * ||A||_F.
  double jacobi_eps = 1e-15;
  int jacobi_max_sweeps = 100;
};

const Tolerances& default_tolerances();

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense symmetric matrix. Writes go through set(), which mirrors, so the
/// stored array is exactly symmetric at all times.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  static SymMatrix identity(std::size_t dim, double scale = 1.0);
  static SymMatrix diagonal(std::span<const double> diag);
  /// From a row-major square array; throws if it is not exactly symmetric.
  static SymMatrix from_row_major(std::size_t dim, std::span<const double> values);
  /// (a + a^T) / 2 of a row-major square array.
  static SymMatrix symmetrized(std::size_t dim, std::span<const double> values);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * dim_ + j] = v;
    data_[j * dim_ + i] = v;
  }
  void add(std::size_t i, std::size_t j, double v) {
    data_[i * dim_ + j] += v;
    if (i != j) data_[j * dim_ + i] += v;
  }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> values() const { return data_; }

  /// this += w * v v^T
  void add_outer(std::span<const double> v, double w);
  SymMatrix scaled(double s) const;
  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;

  bool all_finite() const;
  bool operator==(const SymMatrix& o) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
/// m * v
Vector multiply(const SymMatrix& m, std::span<const double> v);
void multiply_into(const SymMatrix& m, std::span<const double> v, std::span<double> out);
/// v^T m v
double quad_form(std::span<const double> v, const SymMatrix& m);
/// Row-major product of two square matrices of equal dimension.
std::vector<double> matmul(const SymMatrix& a, const SymMatrix& b);
std::vector<double> matmul(std::span<const double> a, std::span<const double> b, std::size_t dim);
/// ||a - I||_F for a row-major square array.
double distance_to_identity(std::span<const double> a, std::size_t dim);
double frobenius(std::span<const double> a);

/// sqrt(v^T m_inv v). Negative round-off in the quadratic form clamps to 0.
double mahalanobis_norm(std::span<const double> v, const SymMatrix& m_inv);

struct EigenDecomposition {
  Vector values;                 ///< ascending
  std::vector<double> vectors;   ///< row-major, column k is the k-th eigenvector
  std::size_t dim = 0;
  double vector(std::size_t row, std::size_t k) const { return vectors[row * dim + k]; }
};

/// Cyclic Jacobi eigen-decomposition. Throws NumericError on non-finite input.
EigenDecomposition eigen_symmetric(const SymMatrix& m, const Tolerances& tol = default_tolerances());
double min_eigenvalue(const SymMatrix& m, const Tolerances& tol = default_tolerances());
double max_eigenvalue(const SymMatrix& m, const Tolerances& tol = default_tolerances());

/// Symmetric A with A*A = m^{-1}. Throws NumericError unless m is positive definite.
SymMatrix inv_sqrt(const SymMatrix& m, const Tolerances& tol = default_tolerances());
/// Inverse of a symmetric positive definite matrix through Cholesky.
SymMatrix inverse_spd(const SymMatrix& m);

SymMatrix block_diag(std::span<const SymMatrix> blocks);

struct SandwichResult {
  bool holds = false;
  double lower_margin = 0.0;  ///< min eigenvalue of (w - lo*u)
  double upper_margin = 0.0;  ///< min eigenvalue of (hi*u - w)
};

/// Whether lo*u <= w <= hi*u in the Loewner order.
SandwichResult psd_sandwich_check(const SymMatrix& u, const SymMatrix& w, double lo, double hi,
                                  const Tolerances& tol = default_tolerances());

/// A PSD matrix together with its inverse, kept in step through rank-one
/// updates (Sherman-Morrison) and periodically re-inverted from scratch.
class MaintainedPsd {
 public:
  MaintainedPsd() = default;
  explicit MaintainedPsd(SymMatrix matrix, int refresh_interval = default_tolerances().refresh_interval);
  static MaintainedPsd identity(std::size_t dim, int refresh_interval = default_tolerances().refresh_interval);

  const SymMatrix& matrix() const { return matrix_; }
  const SymMatrix& inverse() const { return inverse_; }
  double log_det() const { return log_det_; }
  std::size_t dim() const { return matrix_.dim(); }
  int updates_since_refresh() const { return updates_since_refresh_; }

  /// matrix += w v v^T, inverse updated to match. w must be >= 0.
  void rank1_update(std::span<const double> v, double w);
  /// Recompute the inverse by dense factorization.
  void refresh();
  /// ||matrix * inverse - I||_F / dim.
  double inverse_residual() const;

 private:
  SymMatrix matrix_;
  SymMatrix inverse_;
  double log_det_ = 0.0;
  int refresh_interval_ = 256;
  int updates_since_refresh_ = 0;
  Vector scratch_;
};

}  // namespace slateglm::linalg
