#include <doctest.h>

#include <cmath>

#include "ellcert/socp.hpp"
#include "oracles.hpp"

using namespace ellcert;

namespace {

SocpProblem unit_ball_problem(DenseVector f) {
  // ||x|| <= 1 as a second-order constraint
  std::vector<ConeConstraint> cones;
  cones.push_back(ConeConstraint::second_order(identity(2), DenseVector(2),
                                               DenseVector(2), 1.0));
  return SocpProblem::make(2, std::move(f), std::move(cones));
}

SocpProblem box_problem(DenseVector f) {
  // |x_j| <= 1 as four linear constraints
  std::vector<ConeConstraint> cones;
  cones.push_back(ConeConstraint::linear(DenseVector{-1, 0}, 1.0));  // x1 <= 1
  cones.push_back(ConeConstraint::linear(DenseVector{1, 0}, 1.0));   // -x1 <= 1
  cones.push_back(ConeConstraint::linear(DenseVector{0, -1}, 1.0));
  cones.push_back(ConeConstraint::linear(DenseVector{0, 1}, 1.0));
  return SocpProblem::make(2, std::move(f), std::move(cones));
}

ConeConstraint random_soc(oracle::Rng& rng, std::size_t n_i, std::size_t n) {
  return ConeConstraint::second_order(
      oracle::gaussian_matrix(rng, n_i, n), oracle::gaussian_vector(rng, n_i),
      oracle::gaussian_vector(rng, n), 0.3);
}

}  // namespace

TEST_CASE("constraint_value on the unit ball and a linear row") {
  const SocpProblem ball = unit_ball_problem(DenseVector{1, 0});
  CHECK(constraint_value(ball, DenseVector{3, 4}, 0) ==
        doctest::Approx(4.0).epsilon(1e-14));

  std::vector<ConeConstraint> cones;
  cones.push_back(ConeConstraint::linear(DenseVector{1, 0}, 0.0));
  const SocpProblem lin = SocpProblem::make(2, DenseVector{0, 0}, cones);
  CHECK(constraint_value(lin, DenseVector{2, 9}, 0) ==
        doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("constraint_value matches the direct formula") {
  oracle::Rng rng(303);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ConeConstraint> cones;
    cones.push_back(random_soc(rng, 3, 4));
    const SocpProblem p = SocpProblem::make(4, DenseVector(4), cones);
    const DenseVector x = oracle::gaussian_vector(rng, 4);
    const ConeConstraint& k = p.cones[0];
    double norm2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      double w = (*k.b)[i];
      for (std::size_t j = 0; j < 4; ++j) w += (*k.A)(i, j) * x[j];
      norm2 += w * w;
    }
    double affine = k.d;
    for (std::size_t j = 0; j < 4; ++j) affine += k.c[j] * x[j];
    const double expected = std::sqrt(norm2) - affine;
    CHECK(constraint_value(p, x, 0) ==
          doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("feasibility report on the box") {
  const SocpProblem box = box_problem(DenseVector{1, 0});
  const FeasibilityReport at_origin = feasibility(box, DenseVector{0, 0});
  CHECK(at_origin.feasible);
  for (std::size_t i = 0; i < 4; ++i) CHECK(at_origin.values[i] == -1.0);

  const FeasibilityReport outside = feasibility(box, DenseVector{2, 0});
  CHECK_FALSE(outside.feasible);
  CHECK(outside.worst_index == 0);  // the x1 <= 1 row
  CHECK(outside.values[0] == 1.0);
}

TEST_CASE("feasibility picks the smallest index on ties") {
  std::vector<ConeConstraint> cones;
  cones.push_back(ConeConstraint::linear(DenseVector{-1, 0}, 0.0));
  cones.push_back(ConeConstraint::linear(DenseVector{-1, 0}, 0.0));
  const SocpProblem p = SocpProblem::make(2, DenseVector(2), cones);
  CHECK(feasibility(p, DenseVector{1, 0}).worst_index == 0);
}

TEST_CASE("feasibility values agree with a per-constraint loop") {
  oracle::Rng rng(307);
  std::vector<ConeConstraint> cones;
  cones.push_back(random_soc(rng, 2, 3));
  cones.push_back(ConeConstraint::linear(oracle::gaussian_vector(rng, 3), 0.5));
  cones.push_back(random_soc(rng, 4, 3));
  const SocpProblem p = SocpProblem::make(3, DenseVector(3), cones);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseVector x = oracle::gaussian_vector(rng, 3);
    const FeasibilityReport rep = feasibility(p, x);
    std::size_t worst = 0;
    for (std::size_t i = 0; i < p.cones.size(); ++i) {
      CHECK(rep.values[i] == constraint_value(p, x, i));
      if (rep.values[i] > rep.values[worst]) worst = i;
    }
    CHECK(rep.worst_index == worst);
    CHECK(rep.feasible == (rep.values[worst] <= 0.0));
  }
}

TEST_CASE("subgradient special cases") {
  const SocpProblem ball = unit_ball_problem(DenseVector{1, 0});
  const DenseVector g = constraint_subgradient(ball, DenseVector{2, 0}, 0);
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(0.0).epsilon(1e-14));

  std::vector<ConeConstraint> cones;
  cones.push_back(ConeConstraint::linear(DenseVector{1, 1}, 0.0));
  const SocpProblem lin = SocpProblem::make(2, DenseVector(2), cones);
  const DenseVector gl = constraint_subgradient(lin, DenseVector{5, -3}, 0);
  CHECK(gl[0] == -1.0);
  CHECK(gl[1] == -1.0);

  // cone vertex: A x + b = 0 falls back to -c
  std::vector<ConeConstraint> vertex;
  vertex.push_back(ConeConstraint::second_order(identity(2), DenseVector(2),
                                                DenseVector{0, 1}, 0.0));
  const SocpProblem pv = SocpProblem::make(2, DenseVector(2), vertex);
  const DenseVector gv = constraint_subgradient(pv, DenseVector{0, 0}, 0);
  CHECK(gv[0] == 0.0);
  CHECK(gv[1] == -1.0);
}

TEST_CASE("subgradients satisfy the convexity inequality") {
  oracle::Rng rng(311);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ConeConstraint> cones;
    if (trial % 2 == 0)
      cones.push_back(random_soc(rng, 3, 3));
    else
      cones.push_back(
          ConeConstraint::linear(oracle::gaussian_vector(rng, 3), 0.1));
    const SocpProblem p = SocpProblem::make(3, DenseVector(3), cones);
    const DenseVector x = oracle::gaussian_vector(rng, 3);
    const DenseVector y = oracle::gaussian_vector(rng, 3);
    const DenseVector g = constraint_subgradient(p, x, 0);
    const double gx = constraint_value(p, x, 0);
    const double gy = constraint_value(p, y, 0);
    CHECK(gy >= gx + dot(g, sub(y, x)) - 1e-9);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("feasibility is monotone under constraint removal") {
  oracle::Rng rng(313);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ConeConstraint> cones;
    cones.push_back(random_soc(rng, 2, 3));
    cones.push_back(
        ConeConstraint::linear(oracle::gaussian_vector(rng, 3), 0.4));
    cones.push_back(random_soc(rng, 3, 3));
    const SocpProblem full = SocpProblem::make(3, DenseVector(3), cones);
    const DenseVector x = oracle::ball_sample(rng, 3);
    if (!feasibility(full, x).feasible) continue;
    for (std::size_t drop = 0; drop < cones.size(); ++drop) {
      std::vector<ConeConstraint> fewer;
      for (std::size_t i = 0; i < cones.size(); ++i)
        if (i != drop) fewer.push_back(cones[i]);
      const SocpProblem reduced = SocpProblem::make(3, DenseVector(3), fewer);
      CHECK(feasibility(reduced, x).feasible);
    }
  }
}

TEST_CASE("linear constraint values are affine") {
  oracle::Rng rng(317);
  std::vector<ConeConstraint> cones;
  cones.push_back(ConeConstraint::linear(oracle::gaussian_vector(rng, 4), 0.7));
  const SocpProblem p = SocpProblem::make(4, DenseVector(4), cones);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseVector x = oracle::gaussian_vector(rng, 4);
    const DenseVector y = oracle::gaussian_vector(rng, 4);
    const double lhs = constraint_value(p, add(x, y), 0) +
                       constraint_value(p, DenseVector(4), 0);
    const double rhs = constraint_value(p, x, 0) + constraint_value(p, y, 0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("cost") {
  const SocpProblem p = unit_ball_problem(DenseVector{1, 0});
  CHECK(cost(p, DenseVector{3, 7}) == 3.0);
  const SocpProblem zero = unit_ball_problem(DenseVector{0, 0});
  CHECK(cost(zero, DenseVector{9, -2}) == 0.0);

  oracle::Rng rng(331);
  const DenseVector f = oracle::gaussian_vector(rng, 2);
  const SocpProblem q = unit_ball_problem(f);
  const DenseVector x = oracle::gaussian_vector(rng, 2);
  CHECK(cost(q, x) ==
        doctest::Approx(f[0] * x[0] + f[1] * x[1]).epsilon(1e-15));
}

TEST_CASE("is_better") {
  const SocpProblem p = unit_ball_problem(DenseVector{1, 1});
  CHECK(is_better(p, DenseVector{0, 0}, std::nullopt));
  CHECK_FALSE(is_better(p, DenseVector{2, 0}, std::nullopt));
  CHECK(is_better(p, DenseVector{-0.5, -0.5},
                  std::optional<DenseVector>(DenseVector{0, 0})));
  CHECK_FALSE(is_better(p, DenseVector{0, 0},
                        std::optional<DenseVector>(DenseVector{-0.5, -0.5})));
}
