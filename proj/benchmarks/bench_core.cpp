#include <benchmark/benchmark.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ellcert/certify.hpp"
#include "ellcert/ellipsoid.hpp"
#include "ellcert/mpc_compile.hpp"

using namespace ellcert;

namespace {

DenseMatrix random_square(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = g(rng) + (i == j ? 3.0 : 0.0);
  return a;
}

std::string helicopter_text() {
  std::ifstream in(std::string(ELLCERT_MODELS_DIR) + "/helicopter.mpc");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void bm_cut_update(benchmark::State& state) {
  const std::size_t n = state.range(0);
  Ellipsoid e{random_square(n, 1), DenseVector(n)};
  DenseVector g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = 1.0 + 0.1 * i;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cut_update(e, g, 1.000695409372118));
  }
}
BENCHMARK(bm_cut_update)->Arg(4)->Arg(16)->Arg(64);

void bm_jacobi_svd(benchmark::State& state) {
  const DenseMatrix a = random_square(state.range(0), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(jacobi_svd(a));
  }
}
BENCHMARK(bm_jacobi_svd)->Arg(4)->Arg(16)->Arg(64);

void bm_power_iteration(benchmark::State& state) {
  const DenseMatrix a = random_square(state.range(0), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(power_iteration_top(a));
  }
}
BENCHMARK(bm_power_iteration)->Arg(16)->Arg(64);

void bm_solve_unit_ball(benchmark::State& state) {
  std::vector<ConeConstraint> cones;
  cones.push_back(ConeConstraint::second_order(identity(2), DenseVector(2),
                                               DenseVector(2), 1.0));
  const SocpProblem p =
      SocpProblem::make(2, DenseVector{1, 1}, std::move(cones));
  const SolverConfig cfg = SolverConfig::make(
      2, 1e-2, 1.0, 1.0, 2.0 * std::sqrt(2.0), 1.0, 68);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(p, cfg));
  }
}
BENCHMARK(bm_solve_unit_ball);

void bm_parse_model(benchmark::State& state) {
  const std::string text = helicopter_text();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpc::parse(text));
  }
}
BENCHMARK(bm_parse_model);

void bm_solve_instance(benchmark::State& state) {
  mpc::CompileOptions opts;
  opts.recompute = false;
  const mpc::CompiledFamily fam =
      mpc::compile(mpc::parse(helicopter_text()), opts);
  DenseVector x0(6);
  x0[0] = 25;
  x0[1] = 15;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpc::solve_instance(fam, x0));
  }
}
BENCHMARK(bm_solve_instance);

}  // namespace

BENCHMARK_MAIN();
