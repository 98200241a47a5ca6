#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ellcert/linalg.hpp"

namespace ellcert {

// Standard-form second-order cone program:
//   min f^T x  s.t.  ||A_i x + b_i|| <= c_i^T x + d_i,  i = 1..m.
// A constraint with no norm block (A_i absent) is purely linear:
//   0 <= c_i^T x + d_i.
// If every constraint is linear the problem is an LP.

struct ConeConstraint {
  std::optional<DenseMatrix> A;  // n_i x n, absent when n_i == 0
  std::optional<DenseVector> b;  // length n_i
  DenseVector c;                 // length n
  double d = 0.0;

  std::size_t arity() const { return A ? A->rows() : 0; }

  static ConeConstraint linear(DenseVector c, double d);
  static ConeConstraint second_order(DenseMatrix A, DenseVector b,
                                     DenseVector c, double d);
};

struct SocpProblem {
  std::size_t n = 0;           // decision dimension
  DenseVector f;               // cost vector, length n
  std::vector<ConeConstraint> cones;

  // Validates dimension consistency and m >= 1.
  static SocpProblem make(std::size_t n, DenseVector f,
                          std::vector<ConeConstraint> cones);
  std::size_t num_cones() const { return cones.size(); }
};

struct FeasibilityReport {
  DenseVector values;        // g_i(x) per constraint; nonpositive = satisfied
  std::size_t worst_index = 0;  // argmax, smallest index on ties
  bool feasible = false;
};

// g_i(x): ||A_i x + b_i|| - c_i^T x - d_i, or -c_i^T x - d_i when linear.
double constraint_value(const SocpProblem& p, const DenseVector& x,
                        std::size_t i);

// Evaluates every constraint. `tolerance` only affects the feasible flag
// (reporting slack); the stored values are exact.
FeasibilityReport feasibility(const SocpProblem& p, const DenseVector& x,
                              double tolerance = 0.0);

// A subgradient of g_i at x. At the cone vertex (A_i x + b_i = 0) the
// value from the cone axis, -c_i, is used so the oracle stays total.
DenseVector constraint_subgradient(const SocpProblem& p, const DenseVector& x,
                                   std::size_t i);

double cost(const SocpProblem& p, const DenseVector& x);

// x improves on the incumbent: feasible, and strictly cheaper when an
// incumbent exists.
bool is_better(const SocpProblem& p, const DenseVector& x,
               const std::optional<DenseVector>& incumbent);

}  // namespace ellcert
