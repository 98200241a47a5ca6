#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "ellcert/errors.hpp"
#include "ellcert/mpc_compile.hpp"

namespace ellcert::mpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- expression evaluation over (X, x_o) ----

// Affine column: value = cx X + cin x_o + cst.
struct AffineForm {
  DenseMatrix cx;
  DenseMatrix cin;
  DenseVector cst;
  std::size_t rows() const { return cst.size(); }
};

struct Value {
  bool is_const = false;
  DenseMatrix cmat;    // when is_const (scalars are 1x1)
  AffineForm affine;   // otherwise; always a column
};

struct Flattener {
  const MpcModel* model = nullptr;
  std::size_t n_x = 0;
  std::size_t p = 0;  // input dimension
  std::map<std::string, std::size_t> var_offset;

  // column-major within each variable, declaration order across variables
  std::size_t entry(const VariableDecl& v, long row1, long col1) const {
    return var_offset.at(v.name) +
           static_cast<std::size_t>(col1 - 1) * v.rows +
           static_cast<std::size_t>(row1 - 1);
  }
};

Flattener make_flattener(const MpcModel& model) {
  Flattener fl;
  fl.model = &model;
  fl.p = model.input_dim;
  std::size_t off = 0;
  for (const VariableDecl& v : model.variables) {
    fl.var_offset[v.name] = off;
    off += v.rows * v.cols;
  }
  fl.n_x = off;
  return fl;
}

AffineForm zero_affine(const Flattener& fl, std::size_t rows) {
  return {DenseMatrix(rows, fl.n_x), DenseMatrix(rows, fl.p),
          DenseVector(rows)};
}

AffineForm const_to_affine(const Flattener& fl, const DenseMatrix& cmat) {
  if (cmat.cols() != 1)
    throw Error("compile: matrix-valued term where a column was expected");
  AffineForm a = zero_affine(fl, cmat.rows());
  for (std::size_t i = 0; i < cmat.rows(); ++i) a.cst[i] = cmat(i, 0);
  return a;
}

AffineForm as_affine(const Flattener& fl, const Value& v) {
  return v.is_const ? const_to_affine(fl, v.cmat) : v.affine;
}

long index_value(const IndexExpr& ix, long k) { return ix.coef_k * k + ix.offset; }

Value eval_expr(const Expr& e, long k, const Flattener& fl);

Value eval_mul(const Expr& e, long k, const Flattener& fl) {
  Value a = eval_expr(e.kids[0], k, fl);
  Value b = eval_expr(e.kids[1], k, fl);
  auto is_scalar = [](const Value& v) {
    return v.is_const && v.cmat.rows() == 1 && v.cmat.cols() == 1;
  };
  if (a.is_const && b.is_const) {
    Value out;
    out.is_const = true;
    if (is_scalar(a)) {
      out.cmat = b.cmat;
      for (std::size_t i = 0; i < out.cmat.rows(); ++i)
        for (std::size_t j = 0; j < out.cmat.cols(); ++j)
          out.cmat(i, j) *= a.cmat(0, 0);
    } else if (is_scalar(b)) {
      out.cmat = a.cmat;
      for (std::size_t i = 0; i < out.cmat.rows(); ++i)
        for (std::size_t j = 0; j < out.cmat.cols(); ++j)
          out.cmat(i, j) *= b.cmat(0, 0);
    } else {
      out.cmat = matmul(a.cmat, b.cmat);
    }
    return out;
  }
  if (!a.is_const && !b.is_const)
    throw NonConvexConstruct(e.pos, "product of two variable expressions");
  const Value& cv = a.is_const ? a : b;
  const AffineForm& af = a.is_const ? b.affine : a.affine;
  Value out;
  out.is_const = false;
  if (is_scalar(cv)) {
    const double s = cv.cmat(0, 0);
    out.affine = af;
    for (std::size_t i = 0; i < af.rows(); ++i) {
      for (std::size_t j = 0; j < fl.n_x; ++j) out.affine.cx(i, j) *= s;
      for (std::size_t j = 0; j < fl.p; ++j) out.affine.cin(i, j) *= s;
      out.affine.cst[i] *= s;
    }
    return out;
  }
  if (!a.is_const)
    throw NonConvexConstruct(e.pos,
                             "variable expression multiplied by a matrix "
                             "from the right");
  if (cv.cmat.cols() != af.rows())
    throw DimensionMismatch(e.pos, "product shape mismatch");
  out.affine.cx = matmul(cv.cmat, af.cx);
  out.affine.cin = matmul(cv.cmat, af.cin);
  out.affine.cst = matvec(cv.cmat, af.cst);
  return out;
}

Value eval_expr(const Expr& e, long k, const Flattener& fl) {
  const MpcModel& model = *fl.model;
  switch (e.kind) {
    case ExprKind::Number: {
      Value v;
      v.is_const = true;
      v.cmat = DenseMatrix(1, 1);
      v.cmat(0, 0) = e.number;
      return v;
    }
    case ExprKind::ConstRef: {
      const ConstantDef* c = model.find_constant(e.name);
      Value v;
      v.is_const = true;
      if (c->is_matrix) {
        v.cmat = c->matrix;
      } else {
        v.cmat = DenseMatrix(1, 1);
        v.cmat(0, 0) = c->scalar;
      }
      return v;
    }
    case ExprKind::InputRef: {
      Value v;
      v.is_const = false;
      v.affine = zero_affine(fl, fl.p);
      for (std::size_t i = 0; i < fl.p; ++i) v.affine.cin(i, i) = 1.0;
      return v;
    }
    case ExprKind::SliceRef: {
      const VariableDecl* var = model.find_variable(e.name);
      const long col = index_value(e.col, k);
      Value v;
      v.is_const = false;
      if (e.row.colon) {
        v.affine = zero_affine(fl, var->rows);
        for (std::size_t i = 0; i < var->rows; ++i)
          v.affine.cx(i, fl.entry(*var, static_cast<long>(i) + 1, col)) = 1.0;
      } else {
        const long row = index_value(e.row, k);
        v.affine = zero_affine(fl, 1);
        v.affine.cx(0, fl.entry(*var, row, col)) = 1.0;
      }
      return v;
    }
    case ExprKind::Neg: {
      Value v = eval_expr(e.kids[0], k, fl);
      if (v.is_const) {
        for (std::size_t i = 0; i < v.cmat.rows(); ++i)
          for (std::size_t j = 0; j < v.cmat.cols(); ++j)
            v.cmat(i, j) = -v.cmat(i, j);
      } else {
        for (std::size_t i = 0; i < v.affine.rows(); ++i) {
          for (std::size_t j = 0; j < fl.n_x; ++j)
            v.affine.cx(i, j) = -v.affine.cx(i, j);
          for (std::size_t j = 0; j < fl.p; ++j)
            v.affine.cin(i, j) = -v.affine.cin(i, j);
          v.affine.cst[i] = -v.affine.cst[i];
        }
      }
      return v;
    }
    case ExprKind::Add:
    case ExprKind::Sub: {
      Value a = eval_expr(e.kids[0], k, fl);
      Value b = eval_expr(e.kids[1], k, fl);
      const double s = e.kind == ExprKind::Add ? 1.0 : -1.0;
      if (a.is_const && b.is_const) {
        Value out;
        out.is_const = true;
        out.cmat = a.cmat;
        for (std::size_t i = 0; i < out.cmat.rows(); ++i)
          for (std::size_t j = 0; j < out.cmat.cols(); ++j)
            out.cmat(i, j) += s * b.cmat(i, j);
        return out;
      }
      AffineForm fa = as_affine(fl, a);
      AffineForm fb = as_affine(fl, b);
      if (fa.rows() != fb.rows())
        throw DimensionMismatch(e.pos, "sum shape mismatch");
      Value out;
      out.is_const = false;
      out.affine = fa;
      for (std::size_t i = 0; i < fa.rows(); ++i) {
        for (std::size_t j = 0; j < fl.n_x; ++j)
          out.affine.cx(i, j) += s * fb.cx(i, j);
        for (std::size_t j = 0; j < fl.p; ++j)
          out.affine.cin(i, j) += s * fb.cin(i, j);
        out.affine.cst[i] += s * fb.cst[i];
      }
      return out;
    }
    case ExprKind::Mul:
      return eval_mul(e, k, fl);
    case ExprKind::Norm:
      throw NonConvexConstruct(e.pos, "norm in an affine position");
  }
  throw Error("compile: unreachable expression kind");
}

AffineForm eval_affine(const Expr& e, long k, const Flattener& fl) {
  return as_affine(fl, eval_expr(e, k, fl));
}

// Broadcast a 1x1 form to `rows` identical rows.
AffineForm broadcast(const Flattener& fl, const AffineForm& a,
                     std::size_t rows) {
  if (a.rows() == rows) return a;
  if (a.rows() != 1) throw Error("compile: cannot broadcast a non-scalar");
  AffineForm out = zero_affine(fl, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < fl.n_x; ++j) out.cx(i, j) = a.cx(0, j);
    for (std::size_t j = 0; j < fl.p; ++j) out.cin(i, j) = a.cin(0, j);
    out.cst[i] = a.cst[0];
  }
  return out;
}

struct RowAccumulator {
  std::vector<DenseVector> cx;
  std::vector<DenseVector> cin;
  std::vector<double> cst;
  std::vector<std::string> origin;  // constraint group per row

  void append(const AffineForm& a, const std::string& group) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      cx.push_back(a.cx.row(i));
      cin.push_back(a.cin.row(i));
      cst.push_back(a.cst[i]);
      origin.push_back(group);
    }
  }
  std::size_t size() const { return cst.size(); }
};

struct ConeOverX {
  DenseMatrix E;    // n_i x n_x
  DenseMatrix F;    // n_i x p
  DenseVector e0;   // n_i
  DenseVector c;    // n_x
  DenseVector g;    // p
  double d = 0.0;
};

bool row_has_input(const DenseVector& cin) {
  for (std::size_t j = 0; j < cin.size(); ++j)
    if (cin[j] != 0.0) return true;
  return false;
}

// lhs - rhs as a stacked affine column, broadcasting scalars.
AffineForm difference(const Flattener& fl, const AffineForm& lhs,
                      const AffineForm& rhs, SourcePos pos) {
  const std::size_t rows = std::max(lhs.rows(), rhs.rows());
  if ((lhs.rows() != rows && lhs.rows() != 1) ||
      (rhs.rows() != rows && rhs.rows() != 1))
    throw DimensionMismatch(pos, "constraint side shapes do not match");
  AffineForm a = broadcast(fl, lhs, rows);
  const AffineForm b = broadcast(fl, rhs, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < fl.n_x; ++j) a.cx(i, j) -= b.cx(i, j);
    for (std::size_t j = 0; j < fl.p; ++j) a.cin(i, j) -= b.cin(i, j);
    a.cst[i] -= b.cst[i];
  }
  return a;
}

struct GatheredModel {
  RowAccumulator eq;     // rows with no input reference: cx X + cst = 0
  RowAccumulator pin;    // rows referencing the input
  RowAccumulator ineq;   // cx X + cst <= 0 (input refs rejected)
  std::vector<ConeOverX> cones;       // constraint cones
  std::vector<ConeOverX> cost_norms;  // epigraph atoms
  DenseVector f0;   // linear cost over X
  DenseVector fin;  // linear cost over x_o
  double c0 = 0.0;
};

void gather_constraint(const ConstraintGroup& g, long k, const Flattener& fl,
                       GatheredModel& out) {
  const bool cone_le = g.rel == Relation::Le && g.lhs.kind == ExprKind::Norm;
  const bool cone_ge = g.rel == Relation::Ge && g.rhs.kind == ExprKind::Norm;
  if (cone_le || cone_ge) {
    const Expr& norm_side = cone_le ? g.lhs : g.rhs;
    const Expr& scalar_side = cone_le ? g.rhs : g.lhs;
    const AffineForm inner = eval_affine(norm_side.kids[0], k, fl);
    const AffineForm bound = eval_affine(scalar_side, k, fl);
    if (bound.rows() != 1)
      throw DimensionMismatch(g.pos, "constraint '" + g.name +
                                         "': norm bound must be scalar");
    ConeOverX cone;
    cone.E = inner.cx;
    cone.F = inner.cin;
    cone.e0 = inner.cst;
    cone.c = bound.cx.row(0);
    cone.g = bound.cin.row(0);
    cone.d = bound.cst[0];
    out.cones.push_back(std::move(cone));
    return;
  }

  const AffineForm lhs = eval_affine(g.lhs, k, fl);
  const AffineForm rhs = eval_affine(g.rhs, k, fl);
  switch (g.rel) {
    case Relation::Eq: {
      const AffineForm rows = difference(fl, lhs, rhs, g.pos);
      bool has_input = false;
      for (std::size_t i = 0; i < rows.rows(); ++i)
        has_input = has_input || row_has_input(rows.cin.row(i));
      (has_input ? out.pin : out.eq).append(rows, g.name);
      return;
    }
    case Relation::Le: {
      const AffineForm rows = difference(fl, lhs, rhs, g.pos);
      for (std::size_t i = 0; i < rows.rows(); ++i)
        if (row_has_input(rows.cin.row(i)))
          throw Error("compile: constraint '" + g.name +
                      "' references the input in an inequality; only the "
                      "pinning equality may use it");
      out.ineq.append(rows, g.name);
      return;
    }
    case Relation::Ge: {
      const AffineForm rows = difference(fl, rhs, lhs, g.pos);
      for (std::size_t i = 0; i < rows.rows(); ++i)
        if (row_has_input(rows.cin.row(i)))
          throw Error("compile: constraint '" + g.name +
                      "' references the input in an inequality; only the "
                      "pinning equality may use it");
      out.ineq.append(rows, g.name);
      return;
    }
  }
}

void gather_cost_atoms(const Expr& e, double sign, long k, const Flattener& fl,
                       GatheredModel& out) {
  switch (e.kind) {
    case ExprKind::Add:
      gather_cost_atoms(e.kids[0], sign, k, fl, out);
      gather_cost_atoms(e.kids[1], sign, k, fl, out);
      return;
    case ExprKind::Sub:
      gather_cost_atoms(e.kids[0], sign, k, fl, out);
      gather_cost_atoms(e.kids[1], -sign, k, fl, out);
      return;
    case ExprKind::Neg:
      gather_cost_atoms(e.kids[0], -sign, k, fl, out);
      return;
    case ExprKind::Norm: {
      if (sign < 0)
        throw NonConvexConstruct(e.pos, "negated norm in the objective");
      const AffineForm inner = eval_affine(e.kids[0], k, fl);
      ConeOverX atom;
      atom.E = inner.cx;
      atom.F = inner.cin;
      atom.e0 = inner.cst;
      atom.c = DenseVector(fl.n_x);
      atom.g = DenseVector(fl.p);
      out.cost_norms.push_back(std::move(atom));
      return;
    }
    default: {
      const AffineForm a = eval_affine(e, k, fl);
      if (a.rows() != 1)
        throw DimensionMismatch(e.pos, "objective atom must be scalar");
      for (std::size_t j = 0; j < fl.n_x; ++j)
        out.f0[j] += sign * a.cx(0, j);
      for (std::size_t j = 0; j < fl.p; ++j) out.fin[j] += sign * a.cin(0, j);
      out.c0 += sign * a.cst[0];
      return;
    }
  }
}

GatheredModel gather(const MpcModel& model, const Flattener& fl) {
  GatheredModel out;
  out.f0 = DenseVector(fl.n_x);
  out.fin = DenseVector(fl.p);
  for (const ConstraintGroup& g : model.constraints) {
    const long lo = g.range ? g.range->lo : 0;
    const long hi = g.range ? g.range->hi : 0;
    for (long k = lo; k <= hi; ++k) gather_constraint(g, k, fl, out);
  }
  for (const CostTerm& t : model.cost) {
    const long lo = t.range ? t.range->lo : 0;
    const long hi = t.range ? t.range->hi : 0;
    for (long k = lo; k <= hi; ++k) gather_cost_atoms(t.expr, 1.0, k, fl, out);
  }
  return out;
}

// Normalizes the input-referencing equality rows to S X = x_o. The stacked
// rows P_x X + P_in x_o + cst = 0 must have P_in square and invertible and
// no constant offset; then S = -P_in^{-1} P_x.
DenseMatrix extract_pinning(const RowAccumulator& pin, const Flattener& fl) {
  const std::size_t p = fl.p;
  if (pin.size() != p)
    throw Error("compile: the input must be pinned by exactly " +
                std::to_string(p) + " equality rows, found " +
                std::to_string(pin.size()));
  DenseMatrix p_in(p, p);
  DenseMatrix p_x(p, fl.n_x);
  for (std::size_t i = 0; i < p; ++i) {
    if (std::abs(pin.cst[i]) > 1e-9)
      throw Error("compile: input pinning row of '" + pin.origin[i] +
                  "' carries a constant offset");
    for (std::size_t j = 0; j < p; ++j) p_in(i, j) = pin.cin[i][j];
    for (std::size_t j = 0; j < fl.n_x; ++j) p_x(i, j) = pin.cx[i][j];
  }
  // S = -P_in^{-1} P_x, column by column
  DenseMatrix s(p, fl.n_x);
  try {
    for (std::size_t j = 0; j < fl.n_x; ++j) {
      const DenseVector col = lu_solve(p_in, p_x.col(j));
      for (std::size_t i = 0; i < p; ++i) s(i, j) = -col[i];
    }
  } catch (const SingularShape&) {
    throw Error("compile: input pinning rows do not determine the input");
  }
  return s;
}

DenseMatrix rows_to_matrix(const RowAccumulator& acc, std::size_t cols,
                           bool input_block) {
  DenseMatrix out(acc.size(), cols);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const DenseVector& row = input_block ? acc.cin[i] : acc.cx[i];
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = row[j];
  }
  return out;
}

// ---- certificate assembly ----

struct BoxBounds {
  std::vector<double> lo;
  std::vector<double> hi;
};

// Per-entry bounds implied by single-coefficient inequality rows.
BoxBounds entry_boxes(const RowAccumulator& ineq, std::size_t n_x) {
  BoxBounds box{std::vector<double>(n_x, -kInf), std::vector<double>(n_x, kInf)};
  for (std::size_t i = 0; i < ineq.size(); ++i) {
    const DenseVector& row = ineq.cx[i];
    std::size_t nz = 0, idx = 0;
    for (std::size_t j = 0; j < n_x; ++j)
      if (row[j] != 0.0) {
        ++nz;
        idx = j;
      }
    if (nz != 1) continue;
    const double a = row[idx];
    const double b = -ineq.cst[i];  // a X_idx <= b
    if (a > 0)
      box.hi[idx] = std::min(box.hi[idx], b / a);
    else
      box.lo[idx] = std::max(box.lo[idx], b / a);
  }
  return box;
}

std::string num(double x) { return shortest_double(x); }

}  // namespace

CompiledFamily compile(const MpcModel& model, const CompileOptions& opts) {
  double r_o = 27.0;
  if (const auto it = model.information.find("ro");
      it != model.information.end())
    r_o = it->second;
  if (opts.r_o) r_o = *opts.r_o;
  if (r_o <= 0) throw Error("compile: r_o must be positive");
  const Flattener fl = make_flattener(model);
  GatheredModel gm = gather(model, fl);

  CompiledFamily fam;
  fam.model = model;
  fam.param_dim = fl.p;
  fam.n_t = gm.cost_norms.size();

  // equality elimination
  const DenseMatrix S = extract_pinning(gm.pin, fl);
  const DenseMatrix A_eq = rows_to_matrix(gm.eq, fl.n_x, false);
  DenseVector b_eq(gm.eq.size());
  for (std::size_t i = 0; i < gm.eq.size(); ++i) b_eq[i] = -gm.eq.cst[i];
  fam.b_eq = b_eq;
  fam.projection = eliminate_equalities(A_eq, b_eq, S);
  const Projection& proj = fam.projection;
  const std::size_t n_z = proj.n_z;
  fam.n = n_z + fam.n_t;

  // linear inequality rows
  const DenseMatrix A_ineq = rows_to_matrix(gm.ineq, fl.n_x, false);
  DenseVector b_ineq(gm.ineq.size());
  for (std::size_t i = 0; i < gm.ineq.size(); ++i) b_ineq[i] = -gm.ineq.cst[i];
  fam.polytope = project_inequalities(A_ineq, b_ineq, proj, b_eq, r_o);

  // projected cones over y = [Z; t]
  const DenseVector a1b = matvec(proj.A1, b_eq);
  auto project_cone = [&](const ConeOverX& cone,
                          std::optional<std::size_t> epigraph_index) {
    ParamCone pc;
    const std::size_t ni = cone.E.rows();
    DenseMatrix a(ni, fam.n);
    const DenseMatrix em = matmul(cone.E, proj.M);
    for (std::size_t i = 0; i < ni; ++i)
      for (std::size_t j = 0; j < n_z; ++j) a(i, j) = em(i, j);
    pc.A = std::move(a);
    pc.b0 = add(matvec(cone.E, a1b), cone.e0);
    DenseMatrix bx = matmul(cone.E, proj.A2);
    for (std::size_t i = 0; i < ni; ++i)
      for (std::size_t j = 0; j < fl.p; ++j) bx(i, j) += cone.F(i, j);
    pc.Bx = std::move(bx);
    pc.c = DenseVector(fam.n);
    pc.dx = DenseVector(fl.p);
    if (epigraph_index) {
      pc.c[n_z + *epigraph_index] = 1.0;
      pc.d0 = 0.0;
    } else {
      const DenseVector mc = matvec_transposed(proj.M, cone.c);
      for (std::size_t j = 0; j < n_z; ++j) pc.c[j] = mc[j];
      pc.d0 = dot(cone.c, a1b) + cone.d;
      const DenseVector a2c = matvec_transposed(proj.A2, cone.c);
      for (std::size_t j = 0; j < fl.p; ++j) pc.dx[j] = a2c[j] + cone.g[j];
    }
    return pc;
  };
  for (const ConeOverX& cone : gm.cones)
    fam.cones.push_back(project_cone(cone, std::nullopt));
  for (std::size_t j = 0; j < gm.cost_norms.size(); ++j)
    fam.cones.push_back(project_cone(gm.cost_norms[j], j));

  // cost over [Z; t]
  fam.cost.f = DenseVector(fam.n);
  {
    const DenseVector mf = matvec_transposed(proj.M, gm.f0);
    for (std::size_t j = 0; j < n_z; ++j) fam.cost.f[j] = mf[j];
    for (std::size_t j = 0; j < fam.n_t; ++j) fam.cost.f[n_z + j] = 1.0;
    fam.cost.off0 = dot(gm.f0, a1b) + gm.c0;
    const DenseVector a2f = matvec_transposed(proj.A2, gm.f0);
    fam.cost.offx = DenseVector(fl.p);
    for (std::size_t j = 0; j < fl.p; ++j)
      fam.cost.offx[j] = a2f[j] + gm.fin[j];
  }

  // recovery of X
  fam.recover_const = a1b;
  fam.recover_param = proj.A2;
  fam.recover_zpart = DenseMatrix(fl.n_x, fam.n);
  for (std::size_t i = 0; i < fl.n_x; ++i)
    for (std::size_t j = 0; j < n_z; ++j)
      fam.recover_zpart(i, j) = proj.M(i, j);

  // ---- certificate ----
  Certificate& cert = fam.certificate;
  cert.n = fam.n;
  cert.z_bar2 = DenseVector(fam.n);

  const auto& info = model.information;
  const bool have_info = info.count("r") && info.count("R") &&
                         info.count("V") && info.count("eps") &&
                         info.count("lambda");
  if (!have_info && opts.require_information)
    throw MissingInformation(
        "compile: the Information section must provide r, R, V, eps, lambda");
  if (have_info) {
    cert.r = info.at("r");
    cert.R = info.at("R");
    cert.V = info.at("V");
    cert.epsilon = info.at("eps");
    cert.lambda = info.at("lambda");
    if (cert.r <= 0 || cert.R <= 0 || cert.V <= 0 || cert.epsilon <= 0 ||
        cert.lambda < 1.0)
      throw Error("compile: invalid Information values");
    cert.N = iteration_bound(cert.n, cert.r, cert.R, cert.V, cert.epsilon);
    try {
      const WideningBudget wb = widening_budget(cert.n, cert.N, cert.lambda);
      cert.N_lambda_paper = wb.N_lambda_paper;
      cert.N_lambda_safe = wb.N_lambda_safe;
      cert.lambda_convergent = wb.convergent_paper;
      if (!wb.convergent_safe)
        cert.notes.push_back(
            "declared lambda exceeds the determinant-scaling convergence "
            "threshold; only the n_lambda_paper budget is available");
    } catch (const Divergent&) {
      cert.lambda_convergent = false;
      cert.notes.push_back(
          "declared lambda is above exp(1/(n(n+1))); widened budgets "
          "unavailable");
    }
    const ConditionBounds cb = condition_bounds(cert.n, cert.r, cert.R,
                                                cert.V, cert.epsilon, 0.0);
    cert.sigma_min_floor = cb.sigma_min_floor;
    cert.sigma_max_cap = cb.sigma_max_cap;
    cert.cond_bound = cb.cond_bound;
    cert.normB_bound = cb.normB_bound;
    cert.normc_bound = cb.normc_bound;
    const auto [e_b, e_c] =
        fp_error_constants(cert.n, cert.normB_bound, cert.normc_bound);
    cert.E_B = e_b;
    cert.E_c = e_c;
  }

  if (opts.recompute) {
    // inscribed radius of the inner linear relaxation over [Z; t]
    const double t_max =
        fam.n_t > 0 && cert.V > 0
            ? 2.0 * cert.V / static_cast<double>(fam.n_t)
            : 0.0;
    const double r_enc_ext =
        cert.R > 0 ? std::sqrt(cert.R * cert.R +
                               static_cast<double>(fam.n_t) * t_max * t_max) +
                         1.0
                   : 0.0;
    // inscribed radius of the projected linear rows alone (the classical
    // offline program; epigraph dimensions excluded)
    try {
      if (cert.R <= 0)
        throw Error("no enclosing radius available for the recomputation");
      const auto [pmin_z, pmax_z] = extreme_polytopes(fam.polytope);
      const auto [center_z, radius_z] =
          inscribed_ball(pmin_z.A, pmin_z.b, cert.R);
      (void)center_z;
      cert.notes.push_back(
          "recomputed inscribed radius over the linear rows r = " +
          num(radius_z) + " (r_o = " + num(r_o) + ")");
    } catch (const Error& err) {
      cert.notes.push_back(
          std::string(
              "linear-rows inscribed-radius recomputation unavailable: ") +
          err.what());
    }
    try {
      if (cert.R <= 0)
        throw Error("no enclosing radius available for the recomputation");
      // extended parameterized rows: projected linear rows, linearized
      // cones, epigraph boxes
      std::vector<DenseVector> rows;
      std::vector<double> offs;
      std::vector<DenseVector> qrows;
      const std::size_t nq = fl.p;
      for (std::size_t i = 0; i < fam.polytope.A_f.rows(); ++i) {
        DenseVector row(fam.n);
        for (std::size_t j = 0; j < n_z; ++j) row[j] = fam.polytope.A_f(i, j);
        rows.push_back(row);
        offs.push_back(fam.polytope.b_o[i]);
        qrows.push_back(fam.polytope.Q.row(i));
      }
      for (const ParamCone& pc : fam.cones) {
        const std::size_t ni = pc.A->rows();
        const double root = std::sqrt(static_cast<double>(ni));
        for (std::size_t i = 0; i < ni; ++i) {
          for (int sign : {+1, -1}) {
            DenseVector row(fam.n);
            for (std::size_t j = 0; j < fam.n; ++j)
              row[j] = sign * root * (*pc.A)(i, j) - pc.c[j];
            rows.push_back(row);
            offs.push_back(pc.d0 - sign * root * (*pc.b0)[i]);
            DenseVector q(nq);
            for (std::size_t j = 0; j < nq; ++j)
              q[j] = pc.dx[j] - sign * root * (*pc.Bx)(i, j);
            qrows.push_back(q);
          }
        }
      }
      for (std::size_t j = 0; j < fam.n_t; ++j) {
        DenseVector lorow(fam.n), hirow(fam.n);
        lorow[n_z + j] = -1.0;  // t_j >= 0
        hirow[n_z + j] = 1.0;   // t_j <= t_max
        rows.push_back(lorow);
        offs.push_back(0.0);
        qrows.push_back(DenseVector(nq));
        rows.push_back(hirow);
        offs.push_back(t_max);
        qrows.push_back(DenseVector(nq));
      }
      ParamPolytope ext;
      ext.A_f = DenseMatrix(rows.size(), fam.n);
      ext.b_o = DenseVector(rows.size());
      ext.Q = DenseMatrix(rows.size(), nq);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < fam.n; ++j) ext.A_f(i, j) = rows[i][j];
        ext.b_o[i] = offs[i];
        for (std::size_t j = 0; j < nq; ++j) ext.Q(i, j) = qrows[i][j];
      }
      ext.r_o = r_o;
      const auto [pmin, pmax] = extreme_polytopes(ext);
      const auto [center, radius] =
          inscribed_ball(pmin.A, pmin.b, r_enc_ext);
      (void)center;
      cert.notes.push_back("recomputed inscribed radius r = " + num(radius) +
                           " (inner linear relaxation, r_o = " +
                           num(r_o) + ")");
    } catch (const Error& err) {
      cert.notes.push_back(std::string("inscribed-radius recomputation "
                                       "unavailable: ") +
                           err.what());
    }

    // enclosing radius from the bounded trailing block
    try {
      const BoxBounds box = entry_boxes(gm.ineq, fl.n_x);
      const std::size_t block = n_z;
      if (fl.n_x < block) throw Error("trailing block larger than X");
      const std::size_t start = fl.n_x - block;
      double sq = 0.0, maxmag = 0.0;
      for (std::size_t j = start; j < fl.n_x; ++j) {
        if (!std::isfinite(box.lo[j]) || !std::isfinite(box.hi[j]))
          throw Error("trailing decision block is not box-bounded");
        const double mag = std::max(std::abs(box.lo[j]), std::abs(box.hi[j]));
        sq += mag * mag;
        maxmag = std::max(maxmag, mag);
      }
      const double u_bound = std::sqrt(sq);
      DenseMatrix m2(block, n_z), a21(block, proj.A1.cols()),
          a22(block, proj.A2.cols());
      for (std::size_t i = 0; i < block; ++i) {
        for (std::size_t j = 0; j < n_z; ++j) m2(i, j) = proj.M(start + i, j);
        for (std::size_t j = 0; j < proj.A1.cols(); ++j)
          a21(i, j) = proj.A1(start + i, j);
        for (std::size_t j = 0; j < proj.A2.cols(); ++j)
          a22(i, j) = proj.A2(start + i, j);
      }
      const double r_rec =
          compute_R(m2, a21, a22, b_eq, u_bound, r_o);
      cert.notes.push_back("recomputed enclosing radius R = " + num(r_rec) +
                           " (stacked per-entry box bound u = " +
                           num(u_bound) + ")");
      // alternative reading: a per-step norm bound of twice the largest
      // entry bound, as in the source model's prose description
      const VariableDecl& last = model.variables.back();
      if (last.rows * last.cols == block && last.cols >= 1) {
        const double u_alt = 2.0 * maxmag *
                             std::sqrt(static_cast<double>(last.cols));
        const double r_alt =
            compute_R(m2, a21, a22, b_eq, u_alt, r_o);
        cert.notes.push_back(
            "alternative per-step input-norm reading (u = " + num(u_alt) +
            ") gives R = " + num(r_alt));
      }
    } catch (const Error& err) {
      cert.notes.push_back(
          std::string("enclosing-radius recomputation unavailable: ") +
          err.what());
    }

    // cost range
    try {
      if (fam.n_t == 0) {
        const double v_rec = compute_V_linear(fam.polytope, proj, gm.f0,
                                              b_eq, cert.R > 0 ? cert.R : 1e3);
        cert.notes.push_back("recomputed cost range V = " + num(v_rec));
      } else {
        cert.notes.push_back(
            "cost range recomputation for norm objectives is reported via "
            "the epigraph box t <= " +
            num(2.0 * cert.V / static_cast<double>(fam.n_t)) +
            " in the inscribed-radius relaxation");
      }
    } catch (const Error& err) {
      cert.notes.push_back(
          std::string("cost-range recomputation unavailable: ") + err.what());
    }

    // worst-case widening coefficient from the a-priori bounds
    if (cert.cond_bound > 0) {
      const double lam_rec =
          widening_coefficient(cert.n, cert.cond_bound, cert.normB_bound,
                               cert.E_B, cert.E_c);
      std::string note = "worst-case widening coefficient lambda = " +
                         num(lam_rec);
      try {
        const WideningBudget wb = widening_budget(cert.n, cert.N, lam_rec);
        note += "; widened budgets " + std::to_string(wb.N_lambda_paper) +
                " / " + std::to_string(wb.N_lambda_safe);
      } catch (const Divergent&) {
        note += "; n_lambda_paper budget divergent (threshold exp(1/(n(n+1))) "
                "= " +
                num(std::exp(1.0 / (static_cast<double>(cert.n) *
                                    (static_cast<double>(cert.n) + 1.0)))) +
                ")";
      }
      cert.notes.push_back(note);
    }
  }

  return fam;
}

namespace {

DenseVector eval_output(const CompiledFamily& fam, const DenseVector& X) {
  if (!fam.model.output) return DenseVector();
  const Expr& out = *fam.model.output;
  const VariableDecl* var = fam.model.find_variable(out.name);
  std::size_t offset = 0;
  for (const VariableDecl& v : fam.model.variables) {
    if (v.name == var->name) break;
    offset += v.rows * v.cols;
  }
  const long col = out.col.offset;
  if (out.row.colon) {
    DenseVector u(var->rows);
    for (std::size_t i = 0; i < var->rows; ++i)
      u[i] = X[offset + static_cast<std::size_t>(col - 1) * var->rows + i];
    return u;
  }
  DenseVector u(1);
  u[0] = X[offset + static_cast<std::size_t>(col - 1) * var->rows +
           static_cast<std::size_t>(out.row.offset - 1)];
  return u;
}

}  // namespace

InstanceResult solve_instance(const CompiledFamily& fam, const DenseVector& x_o,
                              const InstanceOptions& opts) {
  if (x_o.size() != fam.param_dim)
    throw Error("solve_instance: parameter dimension mismatch");
  InstanceResult res;
  res.param_outside_envelope = two_norm(x_o) > fam.polytope.r_o;

  const std::size_t n = fam.n;
  const std::size_t n_z = fam.projection.n_z;
  std::vector<ConeConstraint> cones;
  cones.reserve(fam.polytope.A_f.rows() + fam.cones.size());
  for (std::size_t i = 0; i < fam.polytope.A_f.rows(); ++i) {
    DenseVector c(n);
    for (std::size_t j = 0; j < n_z; ++j) c[j] = -fam.polytope.A_f(i, j);
    const double d = fam.polytope.b_o[i] + dot(fam.polytope.Q.row(i), x_o);
    cones.push_back(ConeConstraint::linear(std::move(c), d));
  }
  for (const ParamCone& pc : fam.cones) {
    DenseVector b = add(*pc.b0, matvec(*pc.Bx, x_o));
    const double d = pc.d0 + dot(pc.dx, x_o);
    cones.push_back(ConeConstraint::second_order(*pc.A, std::move(b), pc.c, d));
  }
  const SocpProblem instance =
      SocpProblem::make(n, fam.cost.f, std::move(cones));

  const Certificate& cert = fam.certificate;
  long budget = cert.N_lambda_safe > 0
                    ? cert.N_lambda_safe
                    : (cert.N_lambda_paper > 0 ? cert.N_lambda_paper : cert.N);
  if (opts.budget_override) budget = *opts.budget_override;
  if (budget < 1)
    throw Error("solve_instance: no usable iteration budget in the certificate");
  SolverConfig cfg = SolverConfig::make(n, cert.epsilon, cert.r, cert.R,
                                        cert.V, std::max(cert.lambda, 1.0),
                                        static_cast<int>(budget));
  cfg.init_center = cert.z_bar2;
  cfg.x_c = cert.z_bar2;
  cfg.record_trace = opts.record_trace;

  res.outcome = solve(instance, cfg);
  if (res.outcome.best) {
    const DenseVector& y = res.outcome.best->first;
    DenseVector X = add(fam.recover_const,
                        add(matvec(fam.recover_param, x_o),
                            matvec(fam.recover_zpart, y)));
    res.cost_value = dot(fam.cost.f, y) + fam.cost.off0 + dot(fam.cost.offx, x_o);
    res.u_applied = eval_output(fam, X);
    res.decision = std::move(X);
  }
  return res;
}

}  // namespace ellcert::mpc
