#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace ellcert {

// Dense binary64 linear algebra with deterministic evaluation order: every
// reduction is a plain left-to-right loop, so results are bit-reproducible
// across runs and thread counts. Sized for problems up to a few hundred
// variables; no sparse formats.

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n) : data_(n, 0.0) {}
  DenseVector(std::initializer_list<double> entries);

  // Takes ownership of `entries`; rejects NaN/Inf.
  static DenseVector of(std::vector<double> entries);

  std::size_t size() const { return data_.size(); }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::vector<double> data_;
};

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  // Row-major entries; rejects NaN/Inf and size mismatches.
  static DenseMatrix of(std::size_t rows, std::size_t cols,
                        std::vector<double> row_major);
  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  const std::vector<double>& data() const { return data_; }

  DenseVector row(std::size_t i) const;
  DenseVector col(std::size_t j) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SingularPair {
  double sigma = 0.0;
  DenseVector direction;  // unit 2-norm left singular direction
};

// Full decomposition a = u * diag(sigma) * v^T, sigma sorted descending.
struct SvdResult {
  DenseMatrix u;
  DenseVector sigma;
  DenseMatrix v;
};

double two_norm(const DenseVector& v);
double frobenius_norm(const DenseMatrix& a);

// The row-wise 2-norm operator: entry i is the 2-norm of row i, evaluated
// with the same summation order as two_norm.
DenseVector row_norms(const DenseMatrix& a);

double dot(const DenseVector& x, const DenseVector& y);
DenseVector add(const DenseVector& x, const DenseVector& y);
DenseVector sub(const DenseVector& x, const DenseVector& y);
DenseVector scale(double s, const DenseVector& x);
DenseVector matvec(const DenseMatrix& a, const DenseVector& x);
DenseVector matvec_transposed(const DenseMatrix& a, const DenseVector& x);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix identity(std::size_t n);

// Dominant singular value and its left singular direction, by power
// iteration on a a^T from a deterministic start. max_iterations == 0 picks
// the default cap of 10*n + 200. Throws NonConvergence when the residual
// tolerance is not reached within the cap (degenerate or tightly clustered
// spectrum); callers may fall back to jacobi_svd.
SingularPair power_iteration_top(const DenseMatrix& a,
                                 std::size_t max_iterations = 0);

// Smallest singular value of a square matrix via the full Jacobi
// decomposition; returns 0 for singular input.
double min_singular_estimate(const DenseMatrix& a);

// One-sided (Hestenes) Jacobi SVD of a square matrix. High relative
// accuracy on the small dimensions this library targets.
SvdResult jacobi_svd(const DenseMatrix& a);

// sigma_max, via jacobi_svd (works for rectangular input).
double operator_two_norm(const DenseMatrix& a);

// Householder QR of a^T with column pivoting, shared by the null-space and
// minimum-norm operations so one factorization serves many solves.
// `a` is d x n with d <= n; construction throws RankDeficient (naming the
// redundant rows of `a`) when the numerical rank is below d.
class MinNormSolver {
 public:
  explicit MinNormSolver(const DenseMatrix& a, double rank_tol = 1e-10);

  // Minimum-2-norm x with a x = y.
  DenseVector solve(const DenseVector& y) const;

  // Orthonormal basis of the null space of a, as an n x (n - d) matrix.
  DenseMatrix null_basis() const;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_ = 0;  // d
  std::size_t cols_ = 0;  // n
  DenseMatrix q_;         // n x n orthogonal
  DenseMatrix r_;         // n x d upper triangular in its top d x d block
  std::vector<std::size_t> perm_;  // row permutation of `a`
};

// Orthonormal null-space basis of a full-row-rank d x n matrix, d < n.
DenseMatrix null_space_basis(const DenseMatrix& a, double rank_tol = 1e-10);

// Minimum-2-norm solution of a x = y for a full-row-rank wide matrix.
DenseVector min_norm_solve(const DenseMatrix& a, const DenseVector& y,
                           double rank_tol = 1e-10);

// Partially pivoted LU solve of a square system; throws SingularShape on a
// zero pivot.
DenseVector lu_solve(const DenseMatrix& a, const DenseVector& b);

// Determinant by LU; returns 0 for singular input.
double lu_determinant(const DenseMatrix& a);

}  // namespace ellcert
