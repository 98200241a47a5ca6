#include "ellcert/certify.hpp"

#include <cmath>
#include <string>

#include "ellcert/ellipsoid.hpp"
#include "ellcert/errors.hpp"

namespace ellcert {

Projection eliminate_equalities(const DenseMatrix& A_eq,
                                const DenseVector& b_eq,
                                const DenseMatrix& S) {
  const std::size_t n_x = S.cols();
  const std::size_t d_eq = A_eq.rows();
  const std::size_t p = S.rows();
  if (d_eq > 0 && A_eq.cols() != n_x)
    throw Error("eliminate_equalities: A_eq/S width mismatch");
  if (b_eq.size() != d_eq)
    throw Error("eliminate_equalities: b_eq length mismatch");
  const std::size_t d = d_eq + p;
  if (d >= n_x)
    throw Error(
        "eliminate_equalities: no free variables left after elimination "
        "(d >= n_x)");

  DenseMatrix stacked(d, n_x);
  for (std::size_t i = 0; i < d_eq; ++i)
    for (std::size_t j = 0; j < n_x; ++j) stacked(i, j) = A_eq(i, j);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n_x; ++j) stacked(d_eq + i, j) = S(i, j);

  const MinNormSolver solver(stacked);

  Projection proj;
  proj.n_x = n_x;
  proj.n_z = n_x - d;
  proj.d = d;
  proj.M = solver.null_basis();
  proj.A1 = DenseMatrix(n_x, d_eq);
  proj.A2 = DenseMatrix(n_x, p);
  for (std::size_t j = 0; j < d; ++j) {
    DenseVector rhs(d);
    rhs[j] = 1.0;
    const DenseVector column = solver.solve(rhs);
    for (std::size_t i = 0; i < n_x; ++i) {
      if (j < d_eq)
        proj.A1(i, j) = column[i];
      else
        proj.A2(i, j - d_eq) = column[i];
    }
  }
  return proj;
}

ParamPolytope project_inequalities(const DenseMatrix& A_ineq,
                                   const DenseVector& b_ineq,
                                   const Projection& proj,
                                   const DenseVector& b_eq, double r_o) {
  if (A_ineq.cols() != proj.n_x)
    throw Error("project_inequalities: width mismatch");
  if (b_ineq.size() != A_ineq.rows())
    throw Error("project_inequalities: b_ineq length mismatch");

  ParamPolytope pp;
  pp.A_f = matmul(A_ineq, proj.M);
  const DenseVector shift = matvec(A_ineq, matvec(proj.A1, b_eq));
  pp.b_o = sub(b_ineq, shift);
  DenseMatrix q = matmul(A_ineq, proj.A2);
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = 0; j < q.cols(); ++j) q(i, j) = -q(i, j);
  pp.Q = std::move(q);
  pp.r_o = r_o;
  return pp;
}

std::pair<Polytope, Polytope> extreme_polytopes(const ParamPolytope& pp) {
  if (pp.r_o <= 0) throw Error("extreme_polytopes: r_o must be positive");
  const DenseVector nu = row_norms(pp.Q);
  Polytope pmin{pp.A_f, DenseVector(pp.b_o.size())};
  Polytope pmax{pp.A_f, DenseVector(pp.b_o.size())};
  for (std::size_t i = 0; i < pp.b_o.size(); ++i) {
    pmin.b[i] = pp.b_o[i] - pp.r_o * nu[i];
    pmax.b[i] = pp.b_o[i] + pp.r_o * nu[i];
  }
  return {pmin, pmax};
}

namespace {

// Iteration budget for an internal certification program where only coarse
// geometry is known: a ratio of enclosing to inscribed scale and a ratio of
// cost range to tolerance.
long conservative_budget(std::size_t n, double scale_ratio,
                         double range_over_eps) {
  return iteration_bound(n, 1.0, scale_ratio, range_over_eps, 1.0);
}

SolverConfig internal_lp_config(std::size_t n, double epsilon,
                                double enclosing_radius, double range_guess) {
  SolverConfig cfg;
  cfg.epsilon = epsilon;
  cfg.r = 0.0;  // unknown; budget uses the conservative ratio below
  cfg.R = enclosing_radius;
  cfg.V = range_guess;
  cfg.x_c = DenseVector(n);
  cfg.init_center = DenseVector(n);
  cfg.lambda = 1.0;
  cfg.budget = static_cast<int>(
      conservative_budget(n, 1e9, std::max(range_guess, 1.0) / epsilon));
  // stop once the ellipsoid is thinner than any meaningful resolution, long
  // before the shape matrix underflows
  cfg.sigma_min_stop = 1e-12 * enclosing_radius;
  cfg.sigma_max_trigger =
      2.0 * enclosing_radius * std::sqrt(static_cast<double>(n) + 1.0);
  return cfg;
}

}  // namespace

std::pair<DenseVector, double> inscribed_ball(const DenseMatrix& A,
                                              const DenseVector& b,
                                              double enclosing_radius) {
  const std::size_t n_z = A.cols();
  if (b.size() != A.rows()) throw Error("inscribed_ball: b length mismatch");
  if (enclosing_radius <= 0)
    throw Error("inscribed_ball: enclosing radius must be positive");
  const std::size_t n = n_z + 1;  // variables (z, rho)

  const DenseVector norms = row_norms(A);
  // the origin satisfies every row at margin b_i/||a_i||; a floor on rho a
  // little below the worst such margin keeps the program feasible and
  // bounded even when the polytope is empty
  double floor_rho = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    if (norms[i] == 0.0) {
      if (b[i] < 0.0)
        throw EmptyInterior("inscribed_ball: contradictory constant row");
      continue;
    }
    floor_rho = std::min(floor_rho, b[i] / norms[i]);
  }
  floor_rho -= 1.0;

  std::vector<ConeConstraint> cones;
  cones.reserve(A.rows() + 2);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    DenseVector c(n);
    for (std::size_t j = 0; j < n_z; ++j) c[j] = -A(i, j);
    c[n_z] = -norms[i];
    cones.push_back(ConeConstraint::linear(std::move(c), b[i]));
  }
  {
    // confine z to the certified enclosing ball: ||z|| + rho <= R_enc
    DenseMatrix ball(n_z, n);
    for (std::size_t j = 0; j < n_z; ++j) ball(j, j) = 1.0;
    DenseVector c(n);
    c[n_z] = -1.0;
    cones.push_back(ConeConstraint::second_order(
        std::move(ball), DenseVector(n_z), std::move(c), enclosing_radius));
  }
  {
    DenseVector c(n);
    c[n_z] = 1.0;
    cones.push_back(ConeConstraint::linear(std::move(c), -floor_rho));
  }

  DenseVector f(n);
  f[n_z] = -1.0;  // maximize rho
  const SocpProblem lp = SocpProblem::make(n, std::move(f), std::move(cones));

  const double eps = 1e-6;
  SolverConfig cfg = internal_lp_config(
      n, eps, std::sqrt(2.0) * enclosing_radius + std::abs(floor_rho) + 2.0,
      enclosing_radius + std::abs(floor_rho) + 1.0);
  const SolverOutcome res = solve(lp, cfg);
  if (!res.best)
    throw EmptyInterior("inscribed_ball: no feasible point found");

  const DenseVector& zr = res.best->first;
  DenseVector center(n_z);
  for (std::size_t j = 0; j < n_z; ++j) center[j] = zr[j];
  const double radius = zr[n_z];
  if (two_norm(center) + radius >= 0.98 * enclosing_radius)
    throw Unbounded(
        "inscribed_ball: optimum presses against the enclosing ball; "
        "polytope unbounded or enclosing radius too small");
  if (radius < 1e-9)
    throw EmptyInterior(
        "inscribed_ball: certified radius " + std::to_string(radius) +
        " below 1e-9; shrink r_o and retry");
  return {center, radius};
}

double compute_R(const DenseMatrix& M2, const DenseMatrix& A21,
                 const DenseMatrix& A22, const DenseVector& b_eq,
                 double u_bound, double r_o) {
  if (M2.rows() < M2.cols())
    throw SingularBlock("compute_R: M2 must have full column rank");
  const SvdResult svd = jacobi_svd(M2);
  const double smin = svd.sigma[svd.sigma.size() - 1];
  if (smin <= 0.0)
    throw SingularBlock("compute_R: M2 is singular");
  const double pinv_norm = 1.0 / smin;
  const double shift = two_norm(matvec(A21, b_eq));
  const double a22_norm =
      A22.cols() == 0 ? 0.0 : operator_two_norm(A22);
  return pinv_norm * (u_bound + shift + a22_norm * r_o);
}

double compute_V_linear(const ParamPolytope& pp, const Projection& proj,
                        const DenseVector& cost, const DenseVector& b_eq,
                        double enclosing_radius) {
  (void)b_eq;  // the constant c^T A1 b_eq shifts both programs equally
  if (cost.size() != proj.n_x) throw Error("compute_V_linear: cost length");
  const std::size_t p = proj.A2.cols();
  const std::size_t n_z = proj.n_z;
  std::size_t n = p + n_z;
  const bool padded = n < 2;  // solver needs dimension >= 2
  if (padded) n = 2;

  // objective over (x_o, z): cost^T A2 x_o + cost^T M z (+ constant)
  DenseVector g(n);
  {
    const DenseVector ga = matvec_transposed(proj.A2, cost);
    const DenseVector gz = matvec_transposed(proj.M, cost);
    for (std::size_t j = 0; j < p; ++j) g[j] = ga[j];
    for (std::size_t j = 0; j < n_z; ++j) g[p + j] = gz[j];
  }

  const double r_total =
      std::sqrt(pp.r_o * pp.r_o + enclosing_radius * enclosing_radius) + 1.0;

  std::vector<ConeConstraint> cones;
  for (std::size_t i = 0; i < pp.A_f.rows(); ++i) {
    DenseVector c(n);
    for (std::size_t j = 0; j < p; ++j) c[j] = pp.Q(i, j);
    for (std::size_t j = 0; j < n_z; ++j) c[p + j] = -pp.A_f(i, j);
    cones.push_back(ConeConstraint::linear(std::move(c), pp.b_o[i]));
  }
  if (p > 0) {
    DenseMatrix sel(p, n);
    for (std::size_t j = 0; j < p; ++j) sel(j, j) = 1.0;
    cones.push_back(ConeConstraint::second_order(
        std::move(sel), DenseVector(p), DenseVector(n), pp.r_o));
  }
  {
    DenseMatrix eye(n, n);
    for (std::size_t j = 0; j < n; ++j) eye(j, j) = 1.0;
    cones.push_back(ConeConstraint::second_order(
        std::move(eye), DenseVector(n), DenseVector(n), r_total));
  }
  if (padded) {
    for (std::size_t j = p + n_z; j < n; ++j) {
      DenseVector lo(n), hi(n);
      lo[j] = 1.0;
      hi[j] = -1.0;
      cones.push_back(ConeConstraint::linear(std::move(lo), 1.0));
      cones.push_back(ConeConstraint::linear(std::move(hi), 1.0));
    }
  }

  const double eps = 1e-4;
  const double range_guess = std::max(1.0, 2.0 * two_norm(g) * r_total);
  double values[2];
  for (int side = 0; side < 2; ++side) {
    DenseVector f = side == 0 ? g : scale(-1.0, g);
    const SocpProblem lp = SocpProblem::make(n, std::move(f), cones);
    SolverConfig cfg = internal_lp_config(n, eps, r_total + 1.0, range_guess);
    const SolverOutcome res = solve(lp, cfg);
    if (!res.best)
      throw Unbounded("compute_V_linear: range program found no feasible point");
    if (two_norm(res.best->first) >= 0.98 * r_total)
      throw Unbounded(
          "compute_V_linear: optimum presses against the enclosing ball");
    values[side] = res.best->second;
  }
  const double vmin = values[0];
  const double vmax = -values[1];
  return vmax - vmin;
}

std::pair<DenseMatrix, DenseVector> soc_linear_inner(
    const std::vector<ConeConstraint>& cones, std::size_t n) {
  std::size_t rows = 0;
  for (const auto& k : cones) rows += k.A ? 2 * k.arity() : 1;
  DenseMatrix A(rows, n);
  DenseVector b(rows);
  std::size_t r = 0;
  for (const auto& k : cones) {
    if (k.c.size() != n) throw Error("soc_linear_inner: cone width mismatch");
    if (!k.A) {
      for (std::size_t j = 0; j < n; ++j) A(r, j) = -k.c[j];
      b[r] = k.d;
      ++r;
      continue;
    }
    const double root = std::sqrt(static_cast<double>(k.arity()));
    for (std::size_t i = 0; i < k.arity(); ++i) {
      for (int sign : {+1, -1}) {
        for (std::size_t j = 0; j < n; ++j)
          A(r, j) = sign * root * (*k.A)(i, j) - k.c[j];
        b[r] = k.d - sign * root * (*k.b)[i];
        ++r;
      }
    }
  }
  return {std::move(A), std::move(b)};
}

long iteration_bound(std::size_t n, double r, double R, double V,
                     double epsilon) {
  if (n == 0 || r <= 0 || R <= 0 || V <= 0 || epsilon <= 0)
    throw Error("iteration_bound: arguments must be positive");
  const double arg = (R / r) * (V / epsilon);
  if (arg <= 1.0) return 0;
  const double nd = static_cast<double>(n);
  return static_cast<long>(std::ceil(2.0 * nd * (nd + 1.0) * std::log(arg)));
}

ConditionBounds condition_bounds(std::size_t n, double r, double R, double V,
                                 double epsilon, double x_c_norm) {
  if (r <= 0 || R <= 0 || V <= 0 || epsilon <= 0 || x_c_norm < 0)
    throw Error("condition_bounds: arguments must be positive");
  const double root = std::sqrt(static_cast<double>(n) + 1.0);
  ConditionBounds cb;
  cb.sigma_min_floor = r * epsilon / (2.0 * V);
  cb.sigma_max_cap = 4.0 * R * root;
  cb.cond_bound = 8.0 * R * V * root / (r * epsilon);
  cb.normB_bound = 4.0 * R * root;
  cb.normc_bound = R + x_c_norm + cb.normB_bound;
  return cb;
}

FpElementary fp_elementary(std::size_t n) {
  const double u = std::ldexp(1.0, -53);
  const double nd = static_cast<double>(n);
  if (!(nd * u < 1.0)) throw Error("fp_elementary: n u must be below 1");
  FpElementary fp;
  fp.u = u;
  fp.eta = std::ldexp(1.0, -1074);
  fp.A_n = nd * u / (1.0 - nd * u);
  const double a2n = 2.0 * nd * u / (1.0 - 2.0 * nd * u);
  fp.Gamma_n = a2n * std::ldexp(1.0, -1021);  // eta / u
  return fp;
}

std::pair<double, double> fp_error_constants(std::size_t n, double normB,
                                             double normc) {
  if (n < 2) throw Error("fp_error_constants: n must be at least 2");
  if (normB <= 0 || normc <= 0)
    throw Error("fp_error_constants: bounds must be positive");
  const double u = std::ldexp(1.0, -53);
  const double nd = static_cast<double>(n);
  const double alpha = nd / std::sqrt(nd * nd - 1.0);
  const double beta = nd / (nd + 1.0) - alpha;
  const double e_c = u * ((16.0 * nd * nd + 16.0 * nd + 3.0) * normB + normc);
  const double e_b =
      u * normB *
      ((nd * nd / (1.0 - nd * u) + 2.0) * std::abs(beta) + nd +
       2.0 * std::abs(alpha) + 1.0);
  return {e_b, e_c};
}

double widening_coefficient(std::size_t n, double cond, double normB,
                            double E_B, double E_c) {
  if (cond < 1.0 || normB <= 0 || E_B < 0 || E_c < 0)
    throw Error("widening_coefficient: invalid arguments");
  const double nd = static_cast<double>(n);
  const double t = cond / normB;
  return 1.0 + t * std::sqrt(nd) *
                   (std::sqrt(nd) * cond * E_B + E_c + t * nd * E_B * E_c);
}

WideningBudget widening_budget(std::size_t n, long N, double lambda) {
  if (lambda < 1.0) throw Error("widening_budget: lambda must be >= 1");
  if (N < 0) throw Error("widening_budget: N must be nonnegative");
  const double nd = static_cast<double>(n);
  const double lnl = std::log(lambda);
  const double denom_paper = 1.0 - nd * (nd + 1.0) * lnl;
  const double denom_safe = 1.0 - 2.0 * nd * (nd + 1.0) * lnl;

  WideningBudget wb;
  wb.convergent_paper = denom_paper > 0.0;
  wb.convergent_safe = denom_safe > 0.0;
  if (!wb.convergent_paper)
    throw Divergent(
        "widening_budget: lambda at or above exp(1/(n(n+1))); widened method "
        "does not converge");
  wb.N_lambda_paper =
      static_cast<long>(std::ceil(static_cast<double>(N) / denom_paper));
  wb.N_lambda_safe =
      wb.convergent_safe
          ? static_cast<long>(std::ceil(static_cast<double>(N) / denom_safe))
          : 0;
  return wb;
}

bool widening_check(const DenseMatrix& B, const DenseVector& c,
                    const DenseMatrix& Bfl, const DenseVector& cfl,
                    double lambda) {
  const std::size_t n = B.rows();
  if (Bfl.rows() != n || Bfl.cols() != n || B.cols() != n)
    throw Error("widening_check: shape mismatch");
  // columns of Bfl^-1 B and of Bfl^-1, by solves
  DenseMatrix inv_b(n, n);
  DenseMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const DenseVector xb = lu_solve(Bfl, B.col(j));
    DenseVector ej(n);
    ej[j] = 1.0;
    const DenseVector xi = lu_solve(Bfl, ej);
    for (std::size_t i = 0; i < n; ++i) {
      inv_b(i, j) = xb[i];
      inv(i, j) = xi[i];
    }
  }
  const double lhs = operator_two_norm(inv_b) +
                     operator_two_norm(inv) * two_norm(sub(c, cfl));
  return lhs <= lambda;
}

}  // namespace ellcert
