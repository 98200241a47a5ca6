#include "ellcert/socp.hpp"

#include <cmath>
#include <string>

#include "ellcert/errors.hpp"

namespace ellcert {

ConeConstraint ConeConstraint::linear(DenseVector c, double d) {
  ConeConstraint out;
  out.c = std::move(c);
  out.d = d;
  return out;
}

ConeConstraint ConeConstraint::second_order(DenseMatrix A, DenseVector b,
                                            DenseVector c, double d) {
  if (A.rows() != b.size() || A.rows() == 0)
    throw Error("socp: cone block dimensions inconsistent");
  if (A.cols() != c.size())
    throw Error("socp: cone block width does not match c");
  ConeConstraint out;
  out.A = std::move(A);
  out.b = std::move(b);
  out.c = std::move(c);
  out.d = d;
  return out;
}

SocpProblem SocpProblem::make(std::size_t n, DenseVector f,
                              std::vector<ConeConstraint> cones) {
  if (n == 0) throw Error("socp: dimension must be positive");
  if (f.size() != n) throw Error("socp: cost length does not match dimension");
  if (cones.empty()) throw Error("socp: at least one constraint required");
  for (std::size_t i = 0; i < cones.size(); ++i) {
    const auto& k = cones[i];
    if (k.c.size() != n || (k.A && k.A->cols() != n))
      throw Error("socp: constraint " + std::to_string(i) +
                  " has inconsistent dimensions");
  }
  SocpProblem p;
  p.n = n;
  p.f = std::move(f);
  p.cones = std::move(cones);
  return p;
}

double constraint_value(const SocpProblem& p, const DenseVector& x,
                        std::size_t i) {
  const ConeConstraint& k = p.cones[i];
  const double affine = dot(k.c, x) + k.d;
  if (!k.A) return -affine;
  const DenseVector w = add(matvec(*k.A, x), *k.b);
  return two_norm(w) - affine;
}

FeasibilityReport feasibility(const SocpProblem& p, const DenseVector& x,
                              double tolerance) {
  FeasibilityReport rep;
  rep.values = DenseVector(p.cones.size());
  for (std::size_t i = 0; i < p.cones.size(); ++i) {
    rep.values[i] = constraint_value(p, x, i);
    if (rep.values[i] > rep.values[rep.worst_index]) rep.worst_index = i;
  }
  rep.feasible = rep.values[rep.worst_index] <= tolerance;
  return rep;
}

DenseVector constraint_subgradient(const SocpProblem& p, const DenseVector& x,
                                   std::size_t i) {
  const ConeConstraint& k = p.cones[i];
  if (!k.A) return scale(-1.0, k.c);
  const DenseVector w = add(matvec(*k.A, x), *k.b);
  const double norm = two_norm(w);
  if (norm == 0.0) return scale(-1.0, k.c);  // cone vertex
  return sub(scale(1.0 / norm, matvec_transposed(*k.A, w)), k.c);
}

double cost(const SocpProblem& p, const DenseVector& x) {
  return dot(p.f, x);
}

bool is_better(const SocpProblem& p, const DenseVector& x,
               const std::optional<DenseVector>& incumbent) {
  if (!feasibility(p, x).feasible) return false;
  if (!incumbent) return true;
  return cost(p, x) < cost(p, *incumbent);
}

}  // namespace ellcert
