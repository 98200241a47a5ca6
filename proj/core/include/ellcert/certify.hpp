#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ellcert/linalg.hpp"
#include "ellcert/socp.hpp"

namespace ellcert {

// Offline guarantees for a parameterized problem family
//   min f(X)  s.t.  A_eq X = b_eq,  A_ineq X <= b_ineq,  S X = x_o,
// with the parameter bounded by ||x_o|| <= r_o: equality elimination,
// extreme polytopes, inscribed/enclosing radii, cost range, iteration
// budgets and the floating-point widening coefficient.

struct Polytope {
  DenseMatrix A;
  DenseVector b;  // { z : A z <= b }
};

// X = A1 b_eq + A2 x_o + M z reproduces every solution of the stacked
// equality system; M has orthonormal columns.
struct Projection {
  DenseMatrix A1;  // n_x x d_eq
  DenseMatrix A2;  // n_x x p
  DenseMatrix M;   // n_x x n_z
  std::size_t n_x = 0;
  std::size_t n_z = 0;
  std::size_t d = 0;  // d_eq + p
};

// Parameterized polytope P(x_o) = { z : A_f z <= b_o + Q x_o }, valid for
// ||x_o|| <= r_o.
struct ParamPolytope {
  DenseMatrix A_f;
  DenseVector b_o;
  DenseMatrix Q;
  double r_o = 0.0;
};

struct Certificate {
  std::size_t n = 0;     // projected decision dimension
  double r = 0.0;        // inscribed radius
  double R = 0.0;        // enclosing radius
  double V = 0.0;        // cost range bound
  double epsilon = 0.0;  // target accuracy
  DenseVector z_bar2;    // center of the enclosing ball / initial ellipsoid
  long N = 0;            // exact-arithmetic iteration budget
  double lambda = 1.0;   // widening coefficient in force
  long N_lambda_paper = 0;  // budget under volume scaling lambda^(n/2)
  long N_lambda_safe = 0;   // budget under determinant scaling lambda^n
  double sigma_min_floor = 0.0;  // r*eps/(2V)
  double sigma_max_cap = 0.0;    // 4*R*sqrt(n+1)
  double cond_bound = 0.0;       // 8*R*V*sqrt(n+1)/(r*eps)
  double normB_bound = 0.0;      // 4*R*sqrt(n+1)
  double normc_bound = 0.0;      // R + ||x_c|| + normB_bound
  double E_B = 0.0;              // entrywise error bound on the shape update
  double E_c = 0.0;              // entrywise error bound on the center update
  bool lambda_convergent = false;
  std::vector<std::string> notes;  // provenance of soft values
};

// Null-space projection of the stacked system [A_eq; S] X = [b_eq; x_o].
// A_eq may have zero rows. Requires n_z = n_x - d >= 1 and full row rank;
// RankDeficient names the redundant equality rows.
Projection eliminate_equalities(const DenseMatrix& A_eq,
                                const DenseVector& b_eq, const DenseMatrix& S);

//   A_f = A_ineq M,  b_o = b_ineq - A_ineq A1 b_eq,  Q = -A_ineq A2.
ParamPolytope project_inequalities(const DenseMatrix& A_ineq,
                                   const DenseVector& b_ineq,
                                   const Projection& proj,
                                   const DenseVector& b_eq, double r_o);

// P_min: A_f z <= b_o - r_o * rownorms(Q);  P_max: the + r_o variant.
// P_min is inside every P(x_o) and P_max contains every one.
std::pair<Polytope, Polytope> extreme_polytopes(const ParamPolytope& pp);

// Largest ball inside { z : A z <= b }, solved with the project's own
// ellipsoid method as the Chebyshev-center program
//   max rho  s.t.  a_i^T z + ||a_i|| rho <= b_i,
// bounded by the caller-certified enclosing radius. Throws EmptyInterior
// when the certified radius is below 1e-9 and Unbounded when the optimum
// presses against the enclosing ball.
std::pair<DenseVector, double> inscribed_ball(const DenseMatrix& A,
                                              const DenseVector& b,
                                              double enclosing_radius);

// R = ||M2^+|| (u_bound + ||A21 b_eq|| + ||A22|| r_o) with operator
// 2-norms and ||M2^+|| = 1/sigma_min(M2); M2 must have full column rank.
double compute_R(const DenseMatrix& M2, const DenseMatrix& A21,
                 const DenseMatrix& A22, const DenseVector& b_eq,
                 double u_bound, double r_o);

// Cost range of c^T (A1 b_eq + A2 x_o + M z) over the parameterized
// polytope with ||x_o|| <= r_o, by two ellipsoid-method LPs confined to the
// enclosing ball.
double compute_V_linear(const ParamPolytope& pp, const Projection& proj,
                        const DenseVector& cost, const DenseVector& b_eq,
                        double enclosing_radius);

// Inner linear relaxation of second-order constraints: each cone
// ||A' z + b'|| <= c'^T z + d' becomes the 2*n_i rows
// +-sqrt(n_i) (A' z + b')_j <= c'^T z + d'. Linear cones pass through.
std::pair<DenseMatrix, DenseVector> soc_linear_inner(
    const std::vector<ConeConstraint>& cones, std::size_t n);

// ceil(2 n (n+1) ln((R/r)(V/eps))), clamped at 0.
long iteration_bound(std::size_t n, double r, double R, double V,
                     double epsilon);

struct ConditionBounds {
  double sigma_min_floor;  // r*eps/(2V)
  double sigma_max_cap;    // 4R sqrt(n+1)
  double cond_bound;       // 8RV sqrt(n+1)/(r eps)
  double normB_bound;      // 4R sqrt(n+1)
  double normc_bound;      // R + ||x_c|| + normB_bound
};

ConditionBounds condition_bounds(std::size_t n, double r, double R, double V,
                                 double epsilon, double x_c_norm);

struct FpElementary {
  double u;        // unit roundoff, 2^-53
  double eta;      // underflow unit, 2^-1074
  double A_n;      // n u / (1 - n u)
  double Gamma_n;  // A_{2n} eta / u
};

FpElementary fp_elementary(std::size_t n);

// Entrywise error bounds of the floating-point center and shape updates:
//   E_c = u ((16 n^2 + 16 n + 3) normB + normc)
//   E_B = u normB ((n^2/(1 - n u) + 2)|beta| + n + 2|alpha| + 1)
std::pair<double, double> fp_error_constants(std::size_t n, double normB,
                                             double normc);

// Minimal certified widening coefficient:
//   1 + (k/normB) sqrt(n) (sqrt(n) k E_B + E_c + (k/normB) n E_B E_c).
double widening_coefficient(std::size_t n, double cond, double normB,
                            double E_B, double E_c);

struct WideningBudget {
  long N_lambda_paper;     // N / (1 - n(n+1) ln lambda), rounded up
  long N_lambda_safe;      // N / (1 - 2n(n+1) ln lambda), rounded up
  bool convergent_paper;   // lambda < exp(1/(n(n+1)))
  bool convergent_safe;    // lambda < exp(1/(2n(n+1)))
};

// Either budget is 0 with its convergent flag false when the denominator
// is nonpositive; throws Divergent only if both are.
WideningBudget widening_budget(std::size_t n, long N, double lambda);

// Test-side check of the widening inclusion E(B,c) within E(lambda Bfl, cfl):
// evaluates ||Bfl^-1 B|| + ||Bfl^-1|| ||c - cfl|| <= lambda.
bool widening_check(const DenseMatrix& B, const DenseVector& c,
                    const DenseMatrix& Bfl, const DenseVector& cfl,
                    double lambda);

// Deterministic JSON rendering: byte-sorted keys, 17-significant-digit
// decimal floats, so repeated runs are byte-identical.
std::string certificate_to_json(const Certificate& cert);

}  // namespace ellcert
