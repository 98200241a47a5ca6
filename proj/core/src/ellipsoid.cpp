#include "ellcert/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ellcert/errors.hpp"

namespace ellcert {

SolverConfig SolverConfig::make(std::size_t n, double epsilon, double r,
                                double R, double V, double lambda,
                                int budget) {
  if (n < 2) throw Error("solver: dimension must be at least 2");
  if (epsilon <= 0 || r <= 0 || R <= 0 || V < 0 || lambda < 1.0 || budget < 1)
    throw Error("solver: invalid configuration");
  SolverConfig cfg;
  cfg.epsilon = epsilon;
  cfg.r = r;
  cfg.R = R;
  cfg.V = V;
  cfg.x_c = DenseVector(n);
  cfg.init_center = DenseVector(n);
  cfg.lambda = lambda;
  cfg.budget = budget;
  cfg.sigma_min_stop = V > 0 ? r * epsilon / V : 0.0;
  cfg.sigma_max_trigger = 2.0 * R * std::sqrt(static_cast<double>(n) + 1.0);
  return cfg;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::EpsilonOptimal: return "epsilon_optimal";
    case SolveStatus::EarlyFlatStop: return "early_flat_stop";
    case SolveStatus::NoFeasiblePointFound: return "no_feasible_point";
  }
  return "unknown";
}

const char* to_string(CutKind k) {
  switch (k) {
    case CutKind::CostCut: return "cost_cut";
    case CutKind::ConstraintCut: return "constraint_cut";
    case CutKind::Corrective: return "corrective";
  }
  return "unknown";
}

bool contains(const Ellipsoid& e, const DenseVector& z) {
  const DenseVector u = lu_solve(e.B, sub(z, e.c));
  return two_norm(u) <= 1.0 + 1e-12;
}

DenseVector normalize_cut(const Ellipsoid& e, const DenseVector& g) {
  const DenseVector w = matvec_transposed(e.B, g);
  const double norm = two_norm(w);
  if (norm == 0.0)
    throw ZeroCutVector("normalize_cut: B^T g vanished (broken oracle or singular shape)");
  return scale(1.0 / norm, w);
}

Ellipsoid cut_update(const Ellipsoid& e, const DenseVector& g, double lambda) {
  const std::size_t n = e.B.rows();
  if (n < 2) throw Error("cut_update: dimension must be at least 2");
  const double nd = static_cast<double>(n);
  const double alpha = nd / std::sqrt(nd * nd - 1.0);
  const double beta = nd / (nd + 1.0) - alpha;

  const DenseVector p = normalize_cut(e, g);
  const DenseVector bp = matvec(e.B, p);

  Ellipsoid out;
  out.c = sub(e.c, scale(1.0 / (nd + 1.0), bp));
  out.B = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.B(i, j) = lambda * (alpha * e.B(i, j) + beta * bp[i] * p[j]);
  return out;
}

OracleCut separation_oracle(const SocpProblem& p, const DenseVector& center) {
  const FeasibilityReport rep = feasibility(p, center);
  OracleCut cut;
  if (rep.feasible) {
    cut.kind = OracleCutKind::FeasibleCostCut;
    cut.e = p.f;
  } else {
    cut.kind = OracleCutKind::InfeasibleConstraintCut;
    cut.e = constraint_subgradient(p, center, rep.worst_index);
  }
  if (two_norm(cut.e) == 0.0)
    throw ZeroCutVector("separation_oracle: zero cut vector");
  return cut;
}

namespace {

struct TopPair {
  double sigma;
  DenseVector left;  // unit left singular direction
};

TopPair top_singular_pair(const DenseMatrix& b) {
  try {
    const SingularPair sp = power_iteration_top(b);
    return {sp.sigma, sp.direction};
  } catch (const NonConvergence&) {
    const SvdResult svd = jacobi_svd(b);
    return {svd.sigma[0], svd.u.col(0)};
  }
}

}  // namespace

Ellipsoid corrective_step(const Ellipsoid& e, double R,
                          const DenseVector& x_c) {
  const std::size_t n = e.B.rows();
  const double nd = static_cast<double>(n);
  const TopPair top = top_singular_pair(e.B);
  const double sigma = top.sigma;
  const double trigger = 2.0 * R * std::sqrt(nd + 1.0);
  if (!(sigma > trigger))
    throw NotTriggered("corrective_step: sigma_max below trigger");

  const DenseVector& dir = top.left;
  DenseVector v = matvec_transposed(e.B, dir);
  const double vn = two_norm(v);
  if (vn == 0.0) throw SingularShape("corrective_step: degenerate shape");
  v = scale(1.0 / vn, v);

  const double h = dot(dir, sub(e.c, x_c));
  if (std::abs(h) > sigma + R)
    throw EmptyIntersection(
        "corrective_step: ellipsoid does not meet the certified ball");

  const double rho = R / sigma;
  const double m = std::clamp(-h / sigma, -1.0 + rho, 1.0 - rho);
  const double a = rho * std::sqrt(nd + 1.0);
  const double b = std::sqrt((nd + 1.0) / nd);

  Ellipsoid out;
  out.c = add(e.c, scale(m * sigma, dir));
  out.B = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.B(i, j) = b * e.B(i, j) + (a - b) * sigma * dir[i] * v[j];
  return out;
}

namespace {

double abs_det(const DenseMatrix& b) { return std::abs(lu_determinant(b)); }

}  // namespace

SolverOutcome solve(const SocpProblem& p, const SolverConfig& cfg) {
  const std::size_t n = p.n;
  if (n < 2) throw Error("solve: dimension must be at least 2");
  if (cfg.budget < 1 || cfg.lambda < 1.0 || cfg.R <= 0)
    throw Error("solve: invalid configuration");
  if (cfg.x_c.size() != n || cfg.init_center.size() != n)
    throw Error("solve: center dimension mismatch");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double eff_trigger = std::max(
      cfg.sigma_max_trigger, 2.0 * cfg.R * std::sqrt(static_cast<double>(n) + 1.0));

  Ellipsoid e;
  e.B = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i) e.B(i, i) = cfg.R;
  e.c = cfg.init_center;

  SolverOutcome out;
  std::optional<DenseVector> best_pt;
  double best_cost = nan;

  // The smallest singular value shrinks by a factor of at most n/(n+1) per
  // cut, so after a fresh estimate the floor cannot be crossed for a known
  // number of iterations; the full decomposition is skipped until then.
  long skip_checks = 0;

  for (int iter = 1; iter <= cfg.budget; ++iter) {
    out.iterations_used = iter;

    const double fro = frobenius_norm(e.B);
    if (fro > eff_trigger) {
      const TopPair top = top_singular_pair(e.B);
      if (top.sigma > eff_trigger) {
        const double det_before = cfg.record_trace ? abs_det(e.B) : 0.0;
        Ellipsoid corrected = corrective_step(e, cfg.R, cfg.x_c);
        // widening applies to every computed shape update
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            corrected.B(i, j) *= cfg.lambda;
        if (cfg.record_trace) {
          TraceRow row;
          row.iter = iter;
          row.kind = CutKind::Corrective;
          row.det_ratio = abs_det(corrected.B) / det_before;
          row.sigma_min = min_singular_estimate(corrected.B);
          row.sigma_max = top.sigma;
          row.best_cost = best_cost;
          out.trace.push_back(row);
        }
        e = std::move(corrected);
        ++out.corrective_steps;
        skip_checks = 0;
        continue;
      }
    }

    OracleCut cut;
    try {
      cut = separation_oracle(p, e.c);
    } catch (const ZeroCutVector&) {
      if (feasibility(p, e.c).feasible) {
        // zero cost vector at a feasible center: the center is optimal
        if (is_better(p, e.c, best_pt)) {
          best_pt = e.c;
          best_cost = cost(p, e.c);
        }
        break;
      }
      throw;
    }

    if (cut.kind == OracleCutKind::FeasibleCostCut &&
        is_better(p, e.c, best_pt)) {
      best_pt = e.c;
      best_cost = cost(p, e.c);
    }

    const double det_before = cfg.record_trace ? abs_det(e.B) : 0.0;
    e = cut_update(e, cut.e, cfg.lambda);

    double sigma_min = -1.0;
    const bool check_floor = cfg.sigma_min_stop > 0.0 && skip_checks <= 0;
    if (check_floor || cfg.record_trace) {
      sigma_min = min_singular_estimate(e.B);
      if (cfg.sigma_min_stop > 0.0 && sigma_min >= cfg.sigma_min_stop) {
        skip_checks = static_cast<long>(std::floor(
            std::log(sigma_min / cfg.sigma_min_stop) / std::log(1.5)));
      }
    }
    --skip_checks;

    if (cfg.record_trace) {
      TraceRow row;
      row.iter = iter;
      row.kind = cut.kind == OracleCutKind::FeasibleCostCut
                     ? CutKind::CostCut
                     : CutKind::ConstraintCut;
      row.det_ratio = abs_det(e.B) / det_before;
      row.sigma_min = sigma_min;
      row.sigma_max = frobenius_norm(e.B);
      row.best_cost = best_cost;
      out.trace.push_back(row);
    }

    if (cfg.sigma_min_stop > 0.0 && sigma_min >= 0.0 &&
        sigma_min < cfg.sigma_min_stop && best_pt) {
      out.status = SolveStatus::EarlyFlatStop;
      out.best = {{*best_pt, best_cost}};
      return out;
    }
  }

  if (best_pt) {
    out.status = SolveStatus::EpsilonOptimal;
    out.best = {{*best_pt, best_cost}};
  } else {
    out.status = SolveStatus::NoFeasiblePointFound;
  }
  return out;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::string out = "iter,kind,det_ratio,sigma_min,sigma_max,best_cost\n";
  char buf[256];
  for (const TraceRow& row : trace) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.17g\n", row.iter,
                  to_string(row.kind), row.det_ratio, row.sigma_min,
                  row.sigma_max, row.best_cost);
    out += buf;
  }
  return out;
}

}  // namespace ellcert
