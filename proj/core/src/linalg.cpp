#include "ellcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ellcert/errors.hpp"

namespace ellcert {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("linalg: ") + what);
}

void require_finite(const std::vector<double>& xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw Error(std::string("linalg: ") + what);
  }
}

}  // namespace

DenseVector::DenseVector(std::initializer_list<double> entries)
    : data_(entries) {
  require_finite(data_, "vector entries must be finite");
}

DenseVector DenseVector::of(std::vector<double> entries) {
  require_finite(entries, "vector entries must be finite");
  DenseVector v;
  v.data_ = std::move(entries);
  return v;
}

DenseMatrix DenseMatrix::of(std::size_t rows, std::size_t cols,
                            std::vector<double> row_major) {
  require(row_major.size() == rows * cols, "matrix entry count mismatch");
  require_finite(row_major, "matrix entries must be finite");
  DenseMatrix a;
  a.rows_ = rows;
  a.cols_ = cols;
  a.data_ = std::move(row_major);
  return a;
}

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  require(r > 0, "from_rows needs at least one row");
  const std::size_t c = rows.begin()->size();
  std::vector<double> flat;
  flat.reserve(r * c);
  for (const auto& row : rows) {
    require(row.size() == c, "ragged matrix literal");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return DenseMatrix::of(r, c, std::move(flat));
}

DenseVector DenseMatrix::row(std::size_t i) const {
  DenseVector out(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out[j] = (*this)(i, j);
  return out;
}

DenseVector DenseMatrix::col(std::size_t j) const {
  DenseVector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

double two_norm(const DenseVector& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

double frobenius_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

DenseVector row_norms(const DenseMatrix& a) {
  DenseVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    out[i] = std::sqrt(s);
  }
  return out;
}

double dot(const DenseVector& x, const DenseVector& y) {
  require(x.size() == y.size(), "dot size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

DenseVector add(const DenseVector& x, const DenseVector& y) {
  require(x.size() == y.size(), "add size mismatch");
  DenseVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return out;
}

DenseVector sub(const DenseVector& x, const DenseVector& y) {
  require(x.size() == y.size(), "sub size mismatch");
  DenseVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return out;
}

DenseVector scale(double s, const DenseVector& x) {
  DenseVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
  return out;
}

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
  require(a.cols() == x.size(), "matvec size mismatch");
  DenseVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

DenseVector matvec_transposed(const DenseMatrix& a, const DenseVector& x) {
  require(a.rows() == x.size(), "matvec_transposed size mismatch");
  DenseVector out(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j) * x[i];
    out[j] = s;
  }
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matmul size mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

DenseMatrix identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

namespace {

// One power-iteration run for a a^T from the given start. Returns the
// converged Rayleigh estimate (sigma^2) and direction, or sigma < 0 when
// the residual tolerance was not reached.
struct PowerRun {
  double theta = -1.0;
  DenseVector y;
};

PowerRun run_power(const DenseMatrix& a, DenseVector y, std::size_t cap) {
  const double rel_tol = 1e-9;
  double norm_y = two_norm(y);
  if (norm_y == 0.0) return {};
  y = scale(1.0 / norm_y, y);
  for (std::size_t it = 0; it < cap; ++it) {
    DenseVector w = matvec_transposed(a, y);
    double theta = dot(w, w);  // y^T a a^T y for unit y
    if (theta == 0.0) return {};
    DenseVector z = matvec(a, w);  // a a^T y
    // residual of the eigenpair candidate (theta, y)
    double res = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double d = z[i] - theta * y[i];
      res += d * d;
    }
    res = std::sqrt(res);
    const double nz = two_norm(z);
    if (nz == 0.0) return {};
    y = scale(1.0 / nz, z);
    if (res <= rel_tol * theta) return {theta, y};
  }
  return {};
}

}  // namespace

SingularPair power_iteration_top(const DenseMatrix& a,
                                 std::size_t max_iterations) {
  require(a.rows() == a.cols() && a.rows() >= 1,
          "power_iteration_top needs a square matrix");
  const std::size_t n = a.rows();
  if (frobenius_norm(a) == 0.0)
    throw Error("linalg: power_iteration_top on zero matrix");
  const std::size_t cap = max_iterations ? max_iterations : 10 * n + 200;

  DenseVector ones(n);
  for (std::size_t i = 0; i < n; ++i) ones[i] = 1.0;
  PowerRun best = run_power(a, ones, cap);

  // Second deterministic start guards against the all-ones vector being
  // orthogonal to the dominant direction.
  DenseVector rn = row_norms(a);
  std::size_t imax = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (rn[i] > rn[imax]) imax = i;
  DenseVector axis(n);
  axis[imax] = 1.0;
  PowerRun alt = run_power(a, axis, cap);
  if (alt.theta > best.theta) best = alt;

  if (best.theta < 0.0)
    throw NonConvergence(
        "power_iteration_top: residual tolerance not reached within cap");
  return {std::sqrt(best.theta), best.y};
}

SvdResult jacobi_svd(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  require(m >= 1 && n >= 1, "jacobi_svd on empty matrix");

  DenseMatrix g = a;  // columns are rotated in place
  DenseMatrix v = identity(n);
  const double tol = 1e-15;
  const std::size_t max_sweeps = 60;

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          app += g(i, p) * g(i, p);
          aqq += g(i, q) * g(i, q);
          apq += g(i, p) * g(i, q);
        }
        if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double gp = g(i, p), gq = g(i, q);
          g(i, p) = c * gp - s * gq;
          g(i, q) = s * gp + c * gq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  // Column norms are the singular values; sort descending.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += g(i, j) * g(i, j);
    sig[j] = std::sqrt(s);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  SvdResult out;
  out.u = DenseMatrix(m, n);
  out.sigma = DenseVector(n);
  out.v = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = sig[j];
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, j);
    if (sig[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = g(i, j) / sig[j];
    }
  }
  return out;
}

double min_singular_estimate(const DenseMatrix& a) {
  require(a.rows() == a.cols(), "min_singular_estimate needs a square matrix");
  const SvdResult svd = jacobi_svd(a);
  return svd.sigma[svd.sigma.size() - 1];
}

double operator_two_norm(const DenseMatrix& a) {
  if (frobenius_norm(a) == 0.0) return 0.0;
  return jacobi_svd(a).sigma[0];
}

MinNormSolver::MinNormSolver(const DenseMatrix& a, double rank_tol) {
  rows_ = a.rows();
  cols_ = a.cols();
  require(rows_ >= 1 && cols_ >= rows_,
          "MinNormSolver expects a wide (d <= n) matrix");

  // Householder QR of a^T with column pivoting; pivoting permutes rows of a.
  const std::size_t n = cols_, d = rows_;
  DenseMatrix b = transpose(a);  // n x d
  q_ = identity(n);
  perm_.resize(d);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  double r00 = 0.0;
  std::size_t rank = 0;
  for (std::size_t k = 0; k < d; ++k) {
    // pivot: remaining column with the largest trailing norm
    std::size_t piv = k;
    double best = -1.0;
    for (std::size_t j = k; j < d; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += b(i, j) * b(i, j);
      if (s > best) {
        best = s;
        piv = j;
      }
    }
    if (piv != k) {
      for (std::size_t i = 0; i < n; ++i) std::swap(b(i, k), b(i, piv));
      std::swap(perm_[k], perm_[piv]);
    }
    const double colnorm = std::sqrt(std::max(best, 0.0));
    if (k == 0) r00 = colnorm;
    if (colnorm <= rank_tol * r00) break;
    rank = k + 1;

    // Householder reflector zeroing b(k+1.., k)
    double alpha = colnorm;
    if (b(k, k) > 0.0) alpha = -alpha;
    DenseVector w(n);
    w[k] = b(k, k) - alpha;
    for (std::size_t i = k + 1; i < n; ++i) w[i] = b(i, k);
    double wnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) wnorm2 += w[i] * w[i];
    if (wnorm2 > 0.0) {
      const double beta = 2.0 / wnorm2;
      for (std::size_t j = k; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += w[i] * b(i, j);
        s *= beta;
        for (std::size_t i = k; i < n; ++i) b(i, j) -= s * w[i];
      }
      // accumulate q <- q * H
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = k; j < n; ++j) s += q_(i, j) * w[j];
        s *= beta;
        for (std::size_t j = k; j < n; ++j) q_(i, j) -= s * w[j];
      }
    }
    b(k, k) = alpha;
    for (std::size_t i = k + 1; i < n; ++i) b(i, k) = 0.0;
  }

  if (rank < d) {
    std::string msg = "rank-deficient system; redundant rows:";
    for (std::size_t j = rank; j < d; ++j)
      msg += " " + std::to_string(perm_[j]);
    throw RankDeficient(msg);
  }
  r_ = std::move(b);
}

DenseVector MinNormSolver::solve(const DenseVector& y) const {
  require(y.size() == rows_, "MinNormSolver::solve size mismatch");
  const std::size_t n = cols_, d = rows_;
  // a = P r^T q^T  =>  r^T w = P^T y with w = q^T x, trailing w zero.
  DenseVector yp(d);
  for (std::size_t k = 0; k < d; ++k) yp[k] = y[perm_[k]];
  DenseVector w(d);
  for (std::size_t k = 0; k < d; ++k) {
    double s = yp[k];
    for (std::size_t j = 0; j < k; ++j) s -= r_(j, k) * w[j];
    w[k] = s / r_(k, k);
  }
  DenseVector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += q_(i, k) * w[k];
    x[i] = s;
  }
  return x;
}

DenseMatrix MinNormSolver::null_basis() const {
  const std::size_t n = cols_, d = rows_;
  DenseMatrix m(n, n - d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = d; j < n; ++j) m(i, j - d) = q_(i, j);
  return m;
}

DenseMatrix null_space_basis(const DenseMatrix& a, double rank_tol) {
  require(a.rows() < a.cols(), "null_space_basis expects d < n");
  return MinNormSolver(a, rank_tol).null_basis();
}

DenseVector min_norm_solve(const DenseMatrix& a, const DenseVector& y,
                           double rank_tol) {
  return MinNormSolver(a, rank_tol).solve(y);
}

namespace {

// LU with partial pivoting; returns false on a zero pivot.
bool lu_factor(DenseMatrix& a, std::vector<std::size_t>& piv, int& sign) {
  const std::size_t n = a.rows();
  piv.resize(n);
  std::iota(piv.begin(), piv.end(), std::size_t{0});
  sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (a(p, k) == 0.0) return false;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(piv[k], piv[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= a(i, k) * a(k, j);
    }
  }
  return true;
}

}  // namespace

DenseVector lu_solve(const DenseMatrix& a, const DenseVector& b) {
  require(a.rows() == a.cols() && a.rows() == b.size(),
          "lu_solve size mismatch");
  const std::size_t n = a.rows();
  DenseMatrix lu = a;
  std::vector<std::size_t> piv;
  int sign = 0;
  if (!lu_factor(lu, piv, sign))
    throw SingularShape("lu_solve: matrix is numerically singular");
  DenseVector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[piv[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
    x[i] /= lu(i, i);
  }
  return x;
}

double lu_determinant(const DenseMatrix& a) {
  require(a.rows() == a.cols(), "lu_determinant needs a square matrix");
  DenseMatrix lu = a;
  std::vector<std::size_t> piv;
  int sign = 0;
  if (!lu_factor(lu, piv, sign)) return 0.0;
  double det = sign;
  for (std::size_t i = 0; i < lu.rows(); ++i) det *= lu(i, i);
  return det;
}

}  // namespace ellcert
