#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ellcert/certify.hpp"
#include "ellcert/ellipsoid.hpp"
#include "ellcert/mpc_model.hpp"

namespace ellcert::mpc {

// Second-order row over the projected vector y = [Z; t], affine in the
// parameter: || A y + b0 + Bx x_o || <= c^T y + d0 + dx^T x_o.
struct ParamCone {
  std::optional<DenseMatrix> A;
  std::optional<DenseVector> b0;
  std::optional<DenseMatrix> Bx;
  DenseVector c;
  double d0 = 0.0;
  DenseVector dx;
};

// Original cost over the projected vector: f^T y + off0 + offx^T x_o.
struct CostAffine {
  DenseVector f;
  double off0 = 0.0;
  DenseVector offx;
};

struct CompileOptions {
  // Certified parameter-ball radius. Unset falls back to the model's
  // optional Information key `ro`, then to 27.
  std::optional<double> r_o;
  bool recompute = true;     // run the offline geometry recomputation
  bool require_information = true;  // demand the five certified scalars
};

struct CompiledFamily {
  MpcModel model;
  Projection projection;
  ParamPolytope polytope;        // projected linear rows
  std::vector<ParamCone> cones;  // constraint cones plus epigraph cones
  CostAffine cost;
  std::size_t n = 0;         // n_z + n_t
  std::size_t n_t = 0;       // epigraph variables
  std::size_t param_dim = 0;
  DenseVector b_eq;
  Certificate certificate;
  // X = recover_const + recover_param x_o + recover_zpart y
  DenseVector recover_const;
  DenseMatrix recover_param;
  DenseMatrix recover_zpart;
};

// Flattens the decision variables (declaration order, column-major within
// each variable), splits equalities into the pinning system and the rest,
// eliminates them, projects inequalities and cones, rewrites norm cost
// atoms as epigraph cones, and assembles the certificate.
CompiledFamily compile(const MpcModel& model, const CompileOptions& opts = {});

struct InstanceOptions {
  bool record_trace = false;
  std::optional<int> budget_override;
};

struct InstanceResult {
  DenseVector u_applied;  // value of the Output expression
  SolverOutcome outcome;
  bool param_outside_envelope = false;  // ||x_o|| exceeded r_o (solve proceeded)
  DenseVector decision;                  // recovered original vector X
  double cost_value = 0.0;               // original cost at the best point
};

InstanceResult solve_instance(const CompiledFamily& fam, const DenseVector& x_o,
                              const InstanceOptions& opts = {});

struct SimStep {
  int step = 0;
  DenseVector state;
  DenseVector input;
  SolveStatus status = SolveStatus::NoFeasiblePointFound;
  int iterations = 0;
  double best_cost = 0.0;
};

struct Trajectory {
  std::vector<SimStep> steps;
  DenseVector final_state;
  bool aborted = false;
  std::string abort_reason;
};

// Closed loop x_{k+1} = A x_k + B u_k with u_k from solve_instance; aborts
// with the partial trajectory when a step finds no feasible point.
Trajectory simulate(const CompiledFamily& fam, const DenseMatrix& A,
                    const DenseMatrix& B, const DenseVector& x0, int steps);

// CSV with header step,t,x1..xn,u1..um,status,iterations,best_cost and
// t = step * T. A trailing row carries the terminal state.
std::string trajectory_to_csv(const Trajectory& traj, double T);

}  // namespace ellcert::mpc
