#include <cmath>
#include <limits>
#include <string>

#include "ellcert/errors.hpp"
#include "ellcert/mpc_compile.hpp"

namespace ellcert::mpc {

Trajectory simulate(const CompiledFamily& fam, const DenseMatrix& A,
                    const DenseMatrix& B, const DenseVector& x0, int steps) {
  const std::size_t n_s = fam.param_dim;
  if (A.rows() != n_s || A.cols() != n_s)
    throw Error("simulate: plant matrix A must be " + std::to_string(n_s) +
                "x" + std::to_string(n_s));
  if (B.rows() != n_s) throw Error("simulate: plant matrix B row mismatch");
  if (x0.size() != n_s) throw Error("simulate: initial state dimension");
  if (steps < 0) throw Error("simulate: steps must be nonnegative");

  Trajectory traj;
  DenseVector x = x0;
  for (int k = 0; k < steps; ++k) {
    const InstanceResult res = solve_instance(fam, x);
    SimStep step;
    step.step = k;
    step.state = x;
    step.status = res.outcome.status;
    step.iterations = res.outcome.iterations_used;
    step.best_cost = res.outcome.best
                         ? res.outcome.best->second
                         : std::numeric_limits<double>::quiet_NaN();
    if (!res.outcome.best) {
      traj.steps.push_back(std::move(step));
      traj.aborted = true;
      traj.abort_reason = "no feasible point at step " + std::to_string(k);
      traj.final_state = x;
      return traj;
    }
    step.input = res.u_applied;
    traj.steps.push_back(step);

    DenseVector next = matvec(A, x);
    if (res.u_applied.size() > 0) {
      if (B.cols() != res.u_applied.size())
        throw Error("simulate: plant matrix B column mismatch");
      next = add(next, matvec(B, res.u_applied));
    }
    x = std::move(next);
  }
  traj.final_state = x;
  return traj;
}

std::string trajectory_to_csv(const Trajectory& traj, double T) {
  const std::size_t n = traj.final_state.size();
  const std::size_t m =
      traj.steps.empty() ? 0 : traj.steps.front().input.size();
  std::string out = "step,t";
  for (std::size_t i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (std::size_t i = 1; i <= m; ++i) out += ",u" + std::to_string(i);
  out += ",status,iterations,best_cost\n";

  auto row = [&](int step, const DenseVector& x, const DenseVector& u,
                 const char* status, int iterations, double best_cost) {
    out += std::to_string(step) + "," + shortest_double(step * T);
    for (std::size_t i = 0; i < n; ++i)
      out += "," + shortest_double(i < x.size() ? x[i] : 0.0);
    for (std::size_t i = 0; i < m; ++i)
      out += "," + shortest_double(i < u.size() ? u[i] : 0.0);
    out += std::string(",") + status + "," + std::to_string(iterations) + "," +
           shortest_double(best_cost);
    out += "\n";
  };
  for (const SimStep& s : traj.steps)
    row(s.step, s.state, s.input, to_string(s.status), s.iterations,
        s.best_cost);
  if (!traj.aborted)
    row(static_cast<int>(traj.steps.size()), traj.final_state, DenseVector(m),
        "terminal", 0, std::numeric_limits<double>::quiet_NaN());
  return out;
}

}  // namespace ellcert::mpc
