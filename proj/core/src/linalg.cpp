#include "slateglm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slateglm::linalg {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

// Lower-triangular Cholesky factor, row-major. Returns false if a pivot is not positive.
bool cholesky(const SymMatrix& m, std::vector<double>& l) {
  const std::size_t n = m.dim();
  l.assign(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l[j * n + k] * l[j * n + k];
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / ljj;
    }
  }
  return true;
}

}  // namespace

const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

SymMatrix SymMatrix::identity(std::size_t dim, double scale) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.data_[i * dim + i] = scale;
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.data_[i * diag.size() + i] = diag[i];
  return m;
}

SymMatrix SymMatrix::from_row_major(std::size_t dim, std::span<const double> values) {
  require_same_dim(values.size(), dim * dim, "SymMatrix::from_row_major");
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (values[i * dim + j] != values[j * dim + i]) {
        throw std::invalid_argument("SymMatrix::from_row_major: input is not symmetric");
      }
      m.data_[i * dim + j] = values[i * dim + j];
    }
  }
  return m;
}

SymMatrix SymMatrix::symmetrized(std::size_t dim, std::span<const double> values) {
  require_same_dim(values.size(), dim * dim, "SymMatrix::symmetrized");
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      m.set(i, j, 0.5 * (values[i * dim + j] + values[j * dim + i]));
    }
  }
  return m;
}

void SymMatrix::add_outer(std::span<const double> v, double w) {
  require_same_dim(v.size(), dim_, "SymMatrix::add_outer");
  if (w == 0.0) return;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double wi = w * v[i];
    for (std::size_t j = i; j < dim_; ++j) {
      const double inc = wi * v[j];
      data_[i * dim_ + j] += inc;
      if (i != j) data_[j * dim_ + i] += inc;
    }
  }
}

SymMatrix SymMatrix::scaled(double s) const {
  SymMatrix out = *this;
  for (double& x : out.data_) x *= s;
  return out;
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  require_same_dim(dim_, o.dim_, "SymMatrix::operator+");
  SymMatrix out = *this;
  for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] += o.data_[k];
  return out;
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  require_same_dim(dim_, o.dim_, "SymMatrix::operator-");
  SymMatrix out = *this;
  for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] -= o.data_[k];
  return out;
}

bool SymMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void multiply_into(const SymMatrix& m, std::span<const double> v, std::span<double> out) {
  require_same_dim(m.dim(), v.size(), "multiply");
  require_same_dim(m.dim(), out.size(), "multiply");
  const std::size_t n = m.dim();
  const double* a = m.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* r = a + i * n;
    for (std::size_t j = 0; j < n; ++j) s += r[j] * v[j];
    out[i] = s;
  }
}

Vector multiply(const SymMatrix& m, std::span<const double> v) {
  Vector out(m.dim());
  multiply_into(m, v, out);
  return out;
}

double quad_form(std::span<const double> v, const SymMatrix& m) {
  require_same_dim(m.dim(), v.size(), "quad_form");
  const std::size_t n = m.dim();
  const double* a = m.values().data();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* r = a + i * n;
    for (std::size_t j = 0; j < n; ++j) s += r[j] * v[j];
    total += v[i] * s;
  }
  return total;
}

std::vector<double> matmul(std::span<const double> a, std::span<const double> b, std::size_t n) {
  require_same_dim(a.size(), n * n, "matmul");
  require_same_dim(b.size(), n * n, "matmul");
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  }
  return c;
}

std::vector<double> matmul(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "matmul");
  return matmul(a.values(), b.values(), a.dim());
}

double frobenius(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

double distance_to_identity(std::span<const double> a, std::size_t n) {
  require_same_dim(a.size(), n * n, "distance_to_identity");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double e = a[i * n + j] - (i == j ? 1.0 : 0.0);
      s += e * e;
    }
  }
  return std::sqrt(s);
}

double mahalanobis_norm(std::span<const double> v, const SymMatrix& m_inv) {
  return std::sqrt(std::max(0.0, quad_form(v, m_inv)));
}

EigenDecomposition eigen_symmetric(const SymMatrix& m, const Tolerances& tol) {
  if (!m.all_finite()) throw NumericError("eigen_symmetric: non-finite matrix entry");
  const std::size_t n = m.dim();
  std::vector<double> a(m.values().begin(), m.values().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double scale = frobenius(a);
  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(2.0 * s);
  };

  for (int sweep = 0; sweep < tol.jacobi_max_sweeps; ++sweep) {
    if (off_diagonal() <= tol.jacobi_eps * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a[x * n + x] < a[y * n + y]; });
  EigenDecomposition out;
  out.dim = n;
  out.values.resize(n);
  out.vectors.assign(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a[order[k] * n + order[k]];
    for (std::size_t r = 0; r < n; ++r) out.vectors[r * n + k] = v[r * n + order[k]];
  }
  return out;
}

double min_eigenvalue(const SymMatrix& m, const Tolerances& tol) {
  if (m.dim() == 0) throw DimensionError("min_eigenvalue: empty matrix");
  return eigen_symmetric(m, tol).values.front();
}

double max_eigenvalue(const SymMatrix& m, const Tolerances& tol) {
  if (m.dim() == 0) throw DimensionError("max_eigenvalue: empty matrix");
  return eigen_symmetric(m, tol).values.back();
}

SymMatrix inv_sqrt(const SymMatrix& m, const Tolerances& tol) {
  const EigenDecomposition eig = eigen_symmetric(m, tol);
  if (!(eig.values.front() > 0.0)) {
    throw NumericError("inv_sqrt: matrix is not positive definite (min eigenvalue " +
                       std::to_string(eig.values.front()) + ")");
  }
  const std::size_t n = m.dim();
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        s += eig.vector(i, k) * eig.vector(j, k) / std::sqrt(eig.values[k]);
      }
      out.set(i, j, s);
    }
  }
  return out;
}

SymMatrix inverse_spd(const SymMatrix& m) {
  const std::size_t n = m.dim();
  std::vector<double> l;
  if (!cholesky(m, l)) throw NumericError("inverse_spd: matrix is not positive definite");
  // Invert L in place (lower triangular), then M^{-1} = L^{-T} L^{-1}.
  std::vector<double> linv(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    linv[j * n + j] = 1.0 / l[j * n + j];
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= l[i * n + k] * linv[k * n + j];
      linv[i * n + j] = s / l[i * n + i];
    }
  }
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = j; k < n; ++k) s += linv[k * n + i] * linv[k * n + j];
      out.set(i, j, s);
    }
  }
  return out;
}

SymMatrix block_diag(std::span<const SymMatrix> blocks) {
  if (blocks.empty()) throw std::invalid_argument("block_diag: empty block list");
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.dim();
  SymMatrix out(total);
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.dim(); ++i)
      for (std::size_t j = i; j < b.dim(); ++j) out.set(offset + i, offset + j, b(i, j));
    offset += b.dim();
  }
  return out;
}

SandwichResult psd_sandwich_check(const SymMatrix& u, const SymMatrix& w, double lo, double hi,
                                  const Tolerances& tol) {
  require_same_dim(u.dim(), w.dim(), "psd_sandwich_check");
  SandwichResult r;
  r.lower_margin = min_eigenvalue(w - u.scaled(lo), tol);
  r.upper_margin = min_eigenvalue(u.scaled(hi) - w, tol);
  const double slack = -tol.psd_eig * static_cast<double>(u.dim());
  r.holds = r.lower_margin >= slack && r.upper_margin >= slack;
  return r;
}

MaintainedPsd::MaintainedPsd(SymMatrix matrix, int refresh_interval)
    : matrix_(std::move(matrix)), refresh_interval_(refresh_interval) {
  if (refresh_interval_ <= 0) throw std::invalid_argument("MaintainedPsd: refresh interval must be positive");
  refresh();
}

MaintainedPsd MaintainedPsd::identity(std::size_t dim, int refresh_interval) {
  return MaintainedPsd(SymMatrix::identity(dim), refresh_interval);
}

void MaintainedPsd::refresh() {
  std::vector<double> l;
  if (!cholesky(matrix_, l)) throw NumericError("MaintainedPsd: matrix is not positive definite");
  log_det_ = 0.0;
  for (std::size_t i = 0; i < matrix_.dim(); ++i) log_det_ += 2.0 * std::log(l[i * matrix_.dim() + i]);
  inverse_ = inverse_spd(matrix_);
  updates_since_refresh_ = 0;
}

void MaintainedPsd::rank1_update(std::span<const double> v, double w) {
  require_same_dim(v.size(), matrix_.dim(), "MaintainedPsd::rank1_update");
  if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("MaintainedPsd::rank1_update: weight must be finite and >= 0");
  if (w == 0.0) return;
  matrix_.add_outer(v, w);
  if (++updates_since_refresh_ >= refresh_interval_) {
    refresh();
    return;
  }
  // (M + w v v^T)^{-1} = M^{-1} - w (M^{-1} v)(M^{-1} v)^T / (1 + w v^T M^{-1} v)
  scratch_.resize(v.size());
  multiply_into(inverse_, v, scratch_);
  const double denom = 1.0 + w * dot(v, scratch_);
  inverse_.add_outer(scratch_, -w / denom);
  log_det_ += std::log(denom);
}

double MaintainedPsd::inverse_residual() const {
  return distance_to_identity(matmul(matrix_, inverse_), matrix_.dim()) /
         static_cast<double>(matrix_.dim());
}

}  // namespace slateglm::linalg
