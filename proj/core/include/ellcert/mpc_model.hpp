#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ellcert/errors.hpp"
#include "ellcert/linalg.hpp"

namespace ellcert::mpc {

// Text format for receding-horizon problem descriptions: seven ordered
// sections (Input, Output, Constants, Variables, Minimize, SubjectTo,
// Information). Constants admit scalar arithmetic and bracketed matrix
// literals; Minimize admits sums of norm and linear atoms over an index
// range; SubjectTo lines are named affine (in)equalities, optionally
// indexed; Information carries the certified scalars r, R, V, eps, lambda.

struct SourcePos {
  int line = 0;
  int col = 0;
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& msg)
      : Error("line " + std::to_string(pos.line) + ", col " +
              std::to_string(pos.col) + ": " + msg),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

class SyntaxError : public ParseError {
 public:
  using ParseError::ParseError;
};

class UndefinedIdentifier : public ParseError {
 public:
  using ParseError::ParseError;
};

class DimensionMismatch : public ParseError {
 public:
  using ParseError::ParseError;
};

class NonConvexConstruct : public ParseError {
 public:
  using ParseError::ParseError;
};

class MissingInformation : public Error {
 public:
  using Error::Error;
};

// Index inside a slice, linear in the loop variable: coef_k * var + offset,
// or a colon selecting the whole extent.
struct IndexExpr {
  bool colon = false;
  long coef_k = 0;
  std::string var;  // loop variable name when coef_k != 0
  long offset = 0;
};

enum class ExprKind { Number, ConstRef, SliceRef, InputRef, Neg, Add, Sub, Mul, Norm };

struct Expr {
  ExprKind kind = ExprKind::Number;
  double number = 0.0;
  std::string name;  // ConstRef / SliceRef / InputRef
  IndexExpr row, col;
  std::vector<Expr> kids;
  SourcePos pos;
};

struct LoopRange {
  std::string var;
  long lo = 0;
  long hi = 0;  // inclusive
};

struct CostTerm {
  std::optional<LoopRange> range;
  Expr expr;
};

enum class Relation { Eq, Le, Ge };

struct ConstraintGroup {
  std::string name;
  SourcePos pos;
  Expr lhs;
  Relation rel = Relation::Eq;
  Expr rhs;
  std::optional<LoopRange> range;
};

struct ConstantDef {
  std::string name;
  bool is_matrix = false;
  double scalar = 0.0;
  DenseMatrix matrix;
};

struct VariableDecl {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  SourcePos pos;
};

struct MpcModel {
  std::string input_name;
  std::size_t input_dim = 0;
  std::optional<Expr> output;  // variable slice; empty means no output
  std::vector<ConstantDef> constants;
  std::vector<VariableDecl> variables;
  std::vector<CostTerm> cost;
  std::vector<ConstraintGroup> constraints;
  std::map<std::string, double> information;

  const ConstantDef* find_constant(const std::string& name) const;
  const VariableDecl* find_variable(const std::string& name) const;
};

// Parses and validates: identifiers resolve, shapes agree, index ranges stay
// within variable extents, norms appear only in convex positions.
MpcModel parse(const std::string& text);

// Regenerates the text form; parsing the result reproduces the model.
std::string pretty_print(const MpcModel& model);

// Shortest decimal rendering that round-trips the binary64 value.
std::string shortest_double(double x);

}  // namespace ellcert::mpc
