#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ellcert/linalg.hpp"
#include "ellcert/socp.hpp"

namespace ellcert {

// E(B, c) = { B u + c : ||u|| <= 1 }, B nonsingular.
// Vol(E) = |det B| * Vol(unit ball).
struct Ellipsoid {
  DenseMatrix B;
  DenseVector c;
};

struct SolverConfig {
  double epsilon = 0.0;  // target accuracy on the cost
  double r = 0.0;        // inscribed-ball radius of the feasible set
  double R = 0.0;        // enclosing-ball radius
  double V = 0.0;        // cost range bound over the feasible set
  DenseVector x_c;          // center of the enclosing ball
  DenseVector init_center;  // center of the initial ellipsoid B(., R)
  double lambda = 1.0;      // per-step widening, >= 1
  int budget = 0;           // iteration cap, >= 1
  double sigma_min_stop = 0.0;     // early-stop threshold; <= 0 disables
  double sigma_max_trigger = 0.0;  // corrective-step trigger
  bool record_trace = false;

  // Fills x_c/init_center with zeros of the right size and derives the
  // default thresholds sigma_min_stop = r*eps/V and
  // sigma_max_trigger = 2*R*sqrt(n + 1).
  static SolverConfig make(std::size_t n, double epsilon, double r, double R,
                           double V, double lambda, int budget);
};

enum class SolveStatus { EpsilonOptimal, EarlyFlatStop, NoFeasiblePointFound };

enum class CutKind { CostCut, ConstraintCut, Corrective };

const char* to_string(SolveStatus s);
const char* to_string(CutKind k);

struct TraceRow {
  int iter = 0;
  CutKind kind = CutKind::CostCut;
  double det_ratio = 0.0;  // |det B+| / |det B| for this step
  double sigma_min = 0.0;
  double sigma_max = 0.0;  // Frobenius bound, or confirmed top sigma
  double best_cost = 0.0;  // NaN until an incumbent exists
};

struct SolverOutcome {
  SolveStatus status = SolveStatus::NoFeasiblePointFound;
  std::optional<std::pair<DenseVector, double>> best;  // (point, cost)
  int iterations_used = 0;
  int corrective_steps = 0;
  std::vector<TraceRow> trace;  // filled only when record_trace
};

// Membership test ||B^-1 (z - c)|| <= 1 + 1e-12, via a solve.
bool contains(const Ellipsoid& e, const DenseVector& z);

// p = B^T g / ||B^T g||; throws ZeroCutVector when B^T g vanishes.
DenseVector normalize_cut(const Ellipsoid& e, const DenseVector& g);

// Minimal-volume ellipsoid containing the half { x in E : g^T (x - c) <= 0 },
// inflated by `lambda`:
//   c+ = c - B p / (n + 1)
//   B+ = lambda * ( n/sqrt(n^2-1) * B + (n/(n+1) - n/sqrt(n^2-1)) (B p) p^T )
Ellipsoid cut_update(const Ellipsoid& e, const DenseVector& g, double lambda);

enum class OracleCutKind { FeasibleCostCut, InfeasibleConstraintCut };

struct OracleCut {
  OracleCutKind kind;
  DenseVector e;
};

// Separating hyperplane through the center: the cost gradient at a feasible
// center, else the subgradient of the worst violated constraint.
// Throws ZeroCutVector if the selected vector is zero.
OracleCut separation_oracle(const SocpProblem& p, const DenseVector& center);

// Condition-number control. Requires sigma_max(B) > 2 R sqrt(n+1) and the
// feasible set inside B_R(x_c). Shrinks the dominant semi-axis to
// R*sqrt(n+1) while keeping E intersect B_R(x_c) covered:
//   volume ratio <= exp(-1/(2(n+1)))
//   sigma_max(B+) <= 2 R sqrt(n+1) whenever sigma_2(B) <= 2 R sqrt(n)
Ellipsoid corrective_step(const Ellipsoid& e, double R, const DenseVector& x_c);

// The full method: starts from E(R I, init_center), alternates corrective
// steps (when the Frobenius screen and a power-iteration confirmation say
// the top singular value exceeds the trigger) with oracle cuts, widens every
// shape update by lambda, tracks the best feasible point, and stops early
// when the smallest singular value falls below sigma_min_stop.
SolverOutcome solve(const SocpProblem& p, const SolverConfig& cfg);

// CSV with header iter,kind,det_ratio,sigma_min,sigma_max,best_cost.
std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace ellcert
