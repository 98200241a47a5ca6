#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "ellcert/mpc_model.hpp"

namespace ellcert::mpc {

std::string shortest_double(double x) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return buf;
}

const ConstantDef* MpcModel::find_constant(const std::string& name) const {
  for (const auto& c : constants)
    if (c.name == name) return &c;
  return nullptr;
}

const VariableDecl* MpcModel::find_variable(const std::string& name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

namespace {

enum class Tok {
  Ident,
  Number,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Semi,
  Colon,
  Comma,
  Assign,
  Le,
  Ge,
  Plus,
  Minus,
  Star,
  DotDot,
  NormBar,
  End
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Assign: return "'='";
    case Tok::Le: return "'<='";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::DotDot: return "'..'";
    case Tok::NormBar: return "'||'";
    case Tok::End: return "end of file";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  double num = 0.0;
  SourcePos pos;
};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Tok k, std::string t, double num = 0.0) {
    out.push_back({k, std::move(t), num, {line, col}});
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    const SourcePos here{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_'))
        ++j;
      out.push_back({Tok::Ident, text.substr(i, j - i), 0.0, here});
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
        ++j;
      if (j < text.size() && text[j] == '.' &&
          !(j + 1 < text.size() && text[j + 1] == '.')) {
        ++j;
        while (j < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[j])))
          ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          ++k;
          while (k < text.size() &&
                 std::isdigit(static_cast<unsigned char>(text[k])))
            ++k;
          j = k;
        }
      }
      const std::string lit = text.substr(i, j - i);
      out.push_back({Tok::Number, lit, std::strtod(lit.c_str(), nullptr), here});
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    auto two = [&](char a, char b) {
      return c == a && i + 1 < text.size() && text[i + 1] == b;
    };
    if (two('<', '=')) { push(Tok::Le, "<="); i += 2; col += 2; continue; }
    if (two('>', '=')) { push(Tok::Ge, ">="); i += 2; col += 2; continue; }
    if (two('.', '.')) { push(Tok::DotDot, ".."); i += 2; col += 2; continue; }
    if (two('|', '|')) { push(Tok::NormBar, "||"); i += 2; col += 2; continue; }
    switch (c) {
      case '(': push(Tok::LParen, "("); break;
      case ')': push(Tok::RParen, ")"); break;
      case '[': push(Tok::LBracket, "["); break;
      case ']': push(Tok::RBracket, "]"); break;
      case ';': push(Tok::Semi, ";"); break;
      case ':': push(Tok::Colon, ":"); break;
      case ',': push(Tok::Comma, ","); break;
      case '=': push(Tok::Assign, "="); break;
      case '+': push(Tok::Plus, "+"); break;
      case '-': push(Tok::Minus, "-"); break;
      case '*': push(Tok::Star, "*"); break;
      default:
        throw SyntaxError(here, std::string("unexpected character '") + c + "'");
    }
    ++i;
    ++col;
  }
  out.push_back({Tok::End, "", 0.0, {line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  MpcModel run() {
    parse_input();
    parse_output();
    parse_constants();
    parse_variables();
    parse_minimize();
    parse_subject_to();
    parse_information();
    expect(Tok::End, "end of file");
    validate();
    return std::move(model_);
  }

 private:
  std::vector<Token> toks_;
  std::size_t at_ = 0;
  MpcModel model_;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(at_ + ahead, toks_.size() - 1)];
  }
  bool is(Tok k) const { return peek().kind == k; }
  bool is_ident(const char* word) const {
    return is(Tok::Ident) && peek().text == word;
  }
  Token take() { return toks_[std::min(at_++, toks_.size() - 1)]; }
  Token expect(Tok k, const char* what) {
    if (!is(k))
      throw SyntaxError(peek().pos, std::string("expected ") + what +
                                        ", found " + tok_name(peek().kind));
    return take();
  }
  void expect_section(const char* word) {
    if (!is_ident(word))
      throw SyntaxError(peek().pos,
                        std::string("expected section '") + word + "'");
    take();
  }

  bool at_section() const {
    static const char* names[] = {"Input",    "Output",    "Constants",
                                  "Variables", "Minimize", "SubjectTo",
                                  "Information"};
    if (!is(Tok::Ident)) return false;
    for (const char* n : names)
      if (peek().text == n) return true;
    return false;
  }

  // ---- sections ----

  void parse_input() {
    expect_section("Input");
    const Token name = expect(Tok::Ident, "input name");
    expect(Tok::LParen, "'('");
    const Token dim = expect(Tok::Number, "input dimension");
    expect(Tok::RParen, "')'");
    const double d = dim.num;
    if (d < 1 || d != std::floor(d))
      throw SyntaxError(dim.pos, "input dimension must be a positive integer");
    model_.input_name = name.text;
    model_.input_dim = static_cast<std::size_t>(d);
  }

  void parse_output() {
    expect_section("Output");
    if (is_ident("Constants")) return;  // empty output
    model_.output = parse_expr();
  }

  double eval_scalar_const(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Number:
        return e.number;
      case ExprKind::ConstRef: {
        const ConstantDef* c = model_.find_constant(e.name);
        if (!c || c->is_matrix)
          throw UndefinedIdentifier(e.pos, "unknown scalar constant '" +
                                               e.name + "'");
        return c->scalar;
      }
      case ExprKind::Neg:
        return -eval_scalar_const(e.kids[0]);
      case ExprKind::Add:
        return eval_scalar_const(e.kids[0]) + eval_scalar_const(e.kids[1]);
      case ExprKind::Sub:
        return eval_scalar_const(e.kids[0]) - eval_scalar_const(e.kids[1]);
      case ExprKind::Mul:
        return eval_scalar_const(e.kids[0]) * eval_scalar_const(e.kids[1]);
      default:
        throw SyntaxError(e.pos, "expected a scalar constant expression");
    }
  }

  // scalar expression over numbers and previously defined scalar constants
  Expr parse_scalar_expr() {
    Expr e = parse_expr();
    return e;
  }

  void parse_constants() {
    expect_section("Constants");
    while (!at_section()) {
      const Token name = expect(Tok::Ident, "constant name");
      if (model_.find_constant(name.text))
        throw SyntaxError(name.pos, "constant '" + name.text + "' redefined");
      expect(Tok::Assign, "'='");
      ConstantDef def;
      def.name = name.text;
      if (is(Tok::LBracket)) {
        def.is_matrix = true;
        def.matrix = parse_matrix_literal();
      } else {
        def.scalar = eval_scalar_const(parse_scalar_expr());
      }
      expect(Tok::Semi, "';'");
      model_.constants.push_back(std::move(def));
    }
  }

  DenseMatrix parse_matrix_literal() {
    const Token open = expect(Tok::LBracket, "'['");
    std::vector<std::vector<double>> rows(1);
    while (!is(Tok::RBracket)) {
      if (is(Tok::End))
        throw SyntaxError(open.pos, "unterminated matrix literal");
      if (is(Tok::Semi)) {
        take();
        rows.emplace_back();
        continue;
      }
      if (is(Tok::Comma)) {
        take();
        continue;
      }
      double sign = 1.0;
      while (is(Tok::Minus) || is(Tok::Plus)) {
        if (take().kind == Tok::Minus) sign = -sign;
      }
      if (is(Tok::Number)) {
        rows.back().push_back(sign * take().num);
      } else if (is(Tok::Ident)) {
        const Token id = take();
        const ConstantDef* c = model_.find_constant(id.text);
        if (!c || c->is_matrix)
          throw UndefinedIdentifier(
              id.pos, "unknown scalar constant '" + id.text + "' in matrix");
        rows.back().push_back(sign * c->scalar);
      } else {
        throw SyntaxError(peek().pos, "expected a matrix entry");
      }
    }
    take();  // ]
    if (!rows.empty() && rows.back().empty()) rows.pop_back();
    if (rows.empty())
      throw SyntaxError(open.pos, "empty matrix literal");
    const std::size_t cols = rows[0].size();
    std::vector<double> flat;
    for (const auto& r : rows) {
      if (r.size() != cols)
        throw SyntaxError(open.pos, "ragged matrix literal: row of length " +
                                        std::to_string(r.size()) + " after " +
                                        std::to_string(cols));
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return DenseMatrix::of(rows.size(), cols, std::move(flat));
  }

  std::size_t eval_positive_dim(const Expr& e) {
    const double v = eval_scalar_const(e);
    if (v < 1 || std::abs(v - std::round(v)) > 1e-9)
      throw SyntaxError(e.pos, "dimension must be a positive integer");
    return static_cast<std::size_t>(std::llround(v));
  }

  void parse_variables() {
    expect_section("Variables");
    while (!at_section()) {
      const Token name = expect(Tok::Ident, "variable name");
      if (model_.find_variable(name.text) || model_.find_constant(name.text) ||
          name.text == model_.input_name)
        throw SyntaxError(name.pos, "'" + name.text + "' redefined");
      expect(Tok::LParen, "'('");
      const Expr r = parse_scalar_expr();
      expect(Tok::Comma, "','");
      const Expr c = parse_scalar_expr();
      expect(Tok::RParen, "')'");
      VariableDecl decl;
      decl.name = name.text;
      decl.rows = eval_positive_dim(r);
      decl.cols = eval_positive_dim(c);
      decl.pos = name.pos;
      model_.variables.push_back(std::move(decl));
    }
    if (model_.variables.empty())
      throw SyntaxError(peek().pos, "at least one variable is required");
  }

  LoopRange parse_range() {
    const Token var = expect(Tok::Ident, "index variable");
    expect(Tok::Assign, "'='");
    const Expr lo = parse_scalar_expr();
    expect(Tok::DotDot, "'..'");
    const Expr hi = parse_scalar_expr();
    LoopRange range;
    range.var = var.text;
    range.lo = static_cast<long>(std::llround(eval_scalar_const(lo)));
    range.hi = static_cast<long>(std::llround(eval_scalar_const(hi)));
    if (range.lo > range.hi)
      throw SyntaxError(var.pos, "empty index range");
    return range;
  }

  void parse_minimize() {
    expect_section("Minimize");
    bool first = true;
    double sign = 1.0;
    while (!at_section()) {
      if (!first) {
        if (is(Tok::Plus)) {
          take();
          sign = 1.0;
        } else if (is(Tok::Minus)) {
          take();
          sign = -1.0;
        } else {
          throw SyntaxError(peek().pos, "expected '+' or '-' between cost terms");
        }
      }
      CostTerm term;
      if (is_ident("sum")) {
        take();
        expect(Tok::LParen, "'('");
        term.expr = parse_expr();
        expect(Tok::Comma, "','");
        term.range = parse_range();
        expect(Tok::RParen, "')'");
      } else {
        term.expr = parse_expr();
      }
      if (sign < 0) {
        Expr neg;
        neg.kind = ExprKind::Neg;
        neg.pos = term.expr.pos;
        neg.kids.push_back(std::move(term.expr));
        term.expr = std::move(neg);
      }
      model_.cost.push_back(std::move(term));
      first = false;
    }
  }

  void parse_subject_to() {
    expect_section("SubjectTo");
    while (!at_section()) {
      ConstraintGroup g;
      const Token name = expect(Tok::Ident, "constraint name");
      g.name = name.text;
      g.pos = name.pos;
      expect(Tok::Colon, "':'");
      g.lhs = parse_expr();
      if (is(Tok::Assign)) {
        take();
        g.rel = Relation::Eq;
      } else if (is(Tok::Le)) {
        take();
        g.rel = Relation::Le;
      } else if (is(Tok::Ge)) {
        take();
        g.rel = Relation::Ge;
      } else {
        throw SyntaxError(peek().pos, "expected '=', '<=' or '>='");
      }
      g.rhs = parse_expr();
      if (is(Tok::Comma)) {
        take();
        g.range = parse_range();
      }
      expect(Tok::Semi, "';'");
      for (const auto& other : model_.constraints)
        if (other.name == g.name)
          throw SyntaxError(g.pos, "constraint '" + g.name + "' redefined");
      model_.constraints.push_back(std::move(g));
    }
  }

  void parse_information() {
    expect_section("Information");
    while (!is(Tok::End)) {
      const Token key = expect(Tok::Ident, "information key");
      static const char* known[] = {"r", "R", "V", "eps", "lambda", "ro"};
      bool ok = false;
      for (const char* k : known) ok = ok || key.text == k;
      if (!ok)
        throw SyntaxError(key.pos, "unknown information key '" + key.text +
                                       "' (expected r, R, V, eps, lambda, ro)");
      if (model_.information.count(key.text))
        throw SyntaxError(key.pos, "information key '" + key.text + "' repeated");
      expect(Tok::Assign, "'='");
      double sign = 1.0;
      while (is(Tok::Minus) || is(Tok::Plus))
        if (take().kind == Tok::Minus) sign = -sign;
      const Token val = expect(Tok::Number, "number");
      expect(Tok::Semi, "';'");
      model_.information[key.text] = sign * val.num;
    }
  }

  // ---- expressions ----

  Expr parse_expr() {
    double lead = 1.0;
    const SourcePos pos = peek().pos;
    while (is(Tok::Plus) || is(Tok::Minus))
      if (take().kind == Tok::Minus) lead = -lead;
    Expr e = parse_term();
    if (lead < 0) {
      Expr neg;
      neg.kind = ExprKind::Neg;
      neg.pos = pos;
      neg.kids.push_back(std::move(e));
      e = std::move(neg);
    }
    while (is(Tok::Plus) || is(Tok::Minus)) {
      const Tok op = take().kind;
      Expr rhs = parse_term();
      Expr parent;
      parent.kind = op == Tok::Plus ? ExprKind::Add : ExprKind::Sub;
      parent.pos = pos;
      parent.kids.push_back(std::move(e));
      parent.kids.push_back(std::move(rhs));
      e = std::move(parent);
    }
    return e;
  }

  Expr parse_term() {
    Expr e = parse_factor();
    while (is(Tok::Star)) {
      const SourcePos pos = take().pos;
      Expr rhs = parse_factor();
      Expr parent;
      parent.kind = ExprKind::Mul;
      parent.pos = pos;
      parent.kids.push_back(std::move(e));
      parent.kids.push_back(std::move(rhs));
      e = std::move(parent);
    }
    return e;
  }

  Expr parse_factor() {
    const SourcePos pos = peek().pos;
    if (is(Tok::Minus) || is(Tok::Plus)) {
      double sign = 1.0;
      while (is(Tok::Minus) || is(Tok::Plus))
        if (take().kind == Tok::Minus) sign = -sign;
      Expr inner = parse_factor();
      if (sign > 0) return inner;
      Expr neg;
      neg.kind = ExprKind::Neg;
      neg.pos = pos;
      neg.kids.push_back(std::move(inner));
      return neg;
    }
    if (is(Tok::Number)) {
      Expr e;
      e.kind = ExprKind::Number;
      e.number = take().num;
      e.pos = pos;
      return e;
    }
    if (is(Tok::LParen)) {
      take();
      Expr e = parse_expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (is(Tok::NormBar)) {
      take();
      Expr inner = parse_expr();
      expect(Tok::NormBar, "closing '||'");
      Expr e;
      e.kind = ExprKind::Norm;
      e.pos = pos;
      e.kids.push_back(std::move(inner));
      return e;
    }
    if (is(Tok::Ident)) {
      const Token id = take();
      Expr e;
      e.pos = pos;
      e.name = id.text;
      if (is(Tok::LParen)) {
        take();
        e.kind = ExprKind::SliceRef;
        e.row = parse_index();
        if (is(Tok::Comma)) {
          take();
          e.col = parse_index();
        } else {
          e.col = IndexExpr{false, 0, "", 1};  // single index: column 1
        }
        expect(Tok::RParen, "')'");
      } else if (id.text == model_.input_name) {
        e.kind = ExprKind::InputRef;
      } else {
        e.kind = ExprKind::ConstRef;
      }
      return e;
    }
    throw SyntaxError(pos, std::string("expected an expression, found ") +
                               tok_name(peek().kind));
  }

  IndexExpr parse_index() {
    IndexExpr ix;
    if (is(Tok::Colon)) {
      take();
      ix.colon = true;
      return ix;
    }
    long sign = 1;
    bool first = true;
    while (true) {
      if (is(Tok::Plus)) { take(); }
      else if (is(Tok::Minus)) { take(); sign = -sign; }
      if (is(Tok::Number)) {
        const Token t = take();
        if (t.num != std::floor(t.num))
          throw SyntaxError(t.pos, "indices must be integers");
        ix.offset += sign * static_cast<long>(t.num);
      } else if (is(Tok::Ident)) {
        const Token t = take();
        const ConstantDef* c = model_.find_constant(t.text);
        if (c && !c->is_matrix) {
          if (std::abs(c->scalar - std::round(c->scalar)) > 1e-9)
            throw SyntaxError(t.pos, "index constant '" + t.text +
                                         "' is not an integer");
          ix.offset += sign * static_cast<long>(std::llround(c->scalar));
        } else if (c) {
          throw DimensionMismatch(t.pos, "matrix constant '" + t.text +
                                             "' used as an index");
        } else {
          if (!ix.var.empty() && ix.var != t.text)
            throw SyntaxError(t.pos, "two different index variables ('" +
                                         ix.var + "', '" + t.text + "')");
          ix.var = t.text;
          ix.coef_k += sign;
        }
      } else if (first) {
        throw SyntaxError(peek().pos, "expected an index");
      }
      first = false;
      sign = 1;
      if (is(Tok::Plus) || is(Tok::Minus)) continue;
      break;
    }
    return ix;
  }

  // ---- validation ----

  struct Shape {
    std::size_t rows = 1;
    std::size_t cols = 1;
  };

  static std::string shape_str(Shape s) {
    return std::to_string(s.rows) + "x" + std::to_string(s.cols);
  }

  long index_at(const IndexExpr& ix, long k) const {
    return ix.coef_k * k + ix.offset;
  }

  void check_index(const IndexExpr& ix, std::size_t extent, long k,
                   const Expr& where) const {
    if (ix.colon) return;
    const long v = index_at(ix, k);
    if (v < 1 || v > static_cast<long>(extent))
      throw DimensionMismatch(
          where.pos, "index " + std::to_string(v) + " outside '" + where.name +
                         "' extent 1.." + std::to_string(extent));
  }

  // Shape analysis plus identifier and index-range resolution. `range`
  // is the enclosing loop, if any; indices are checked at both endpoints.
  Shape check_expr(const Expr& e, const std::optional<LoopRange>& range) const {
    switch (e.kind) {
      case ExprKind::Number:
        return {1, 1};
      case ExprKind::ConstRef: {
        const ConstantDef* c = model_.find_constant(e.name);
        if (!c) {
          if (model_.find_variable(e.name))
            throw DimensionMismatch(
                e.pos, "variable '" + e.name + "' must be sliced");
          throw UndefinedIdentifier(e.pos,
                                    "unknown identifier '" + e.name + "'");
        }
        if (c->is_matrix) return {c->matrix.rows(), c->matrix.cols()};
        return {1, 1};
      }
      case ExprKind::InputRef:
        return {model_.input_dim, 1};
      case ExprKind::SliceRef: {
        const VariableDecl* v = model_.find_variable(e.name);
        if (!v) {
          if (model_.find_constant(e.name))
            throw DimensionMismatch(
                e.pos, "constant '" + e.name + "' cannot be sliced");
          if (e.name == model_.input_name)
            throw DimensionMismatch(
                e.pos, "input '" + e.name + "' cannot be sliced");
          throw UndefinedIdentifier(e.pos,
                                    "unknown identifier '" + e.name + "'");
        }
        for (const IndexExpr* ix : {&e.row, &e.col}) {
          if (ix->coef_k != 0) {
            if (!range)
              throw UndefinedIdentifier(
                  e.pos, "unbound index variable '" + ix->var + "'");
            if (ix->var != range->var)
              throw UndefinedIdentifier(
                  e.pos, "unknown index variable '" + ix->var + "'");
          }
        }
        if (e.col.colon)
          throw DimensionMismatch(e.pos,
                                  "column index must select a single column");
        const long lo = range ? range->lo : 0;
        const long hi = range ? range->hi : 0;
        check_index(e.col, v->cols, lo, e);
        check_index(e.col, v->cols, hi, e);
        if (e.row.colon) {
          return {v->rows, 1};
        }
        check_index(e.row, v->rows, lo, e);
        check_index(e.row, v->rows, hi, e);
        return {1, 1};
      }
      case ExprKind::Neg:
        return check_expr(e.kids[0], range);
      case ExprKind::Add:
      case ExprKind::Sub: {
        const Shape a = check_expr(e.kids[0], range);
        const Shape b = check_expr(e.kids[1], range);
        if (a.rows != b.rows || a.cols != b.cols)
          throw DimensionMismatch(e.pos, "shape mismatch: " + shape_str(a) +
                                             " vs " + shape_str(b));
        return a;
      }
      case ExprKind::Mul: {
        const Shape a = check_expr(e.kids[0], range);
        const Shape b = check_expr(e.kids[1], range);
        if (a.rows == 1 && a.cols == 1) return b;
        if (b.rows == 1 && b.cols == 1) return a;
        if (a.cols != b.rows)
          throw DimensionMismatch(e.pos, "cannot multiply " + shape_str(a) +
                                             " by " + shape_str(b));
        return {a.rows, b.cols};
      }
      case ExprKind::Norm: {
        const Shape a = check_expr(e.kids[0], range);
        if (a.cols != 1)
          throw DimensionMismatch(
              e.pos, "norm argument must be a column, got " + shape_str(a));
        return {1, 1};
      }
    }
    return {1, 1};
  }

  static bool contains_norm(const Expr& e) {
    if (e.kind == ExprKind::Norm) return true;
    for (const Expr& k : e.kids)
      if (contains_norm(k)) return true;
    return false;
  }

  // Cost atoms must be +norm or affine; constraints admit a norm only as
  // the whole lesser side of an inequality.
  void check_cost_atoms(const Expr& e, bool negated,
                        const std::optional<LoopRange>& range) const {
    switch (e.kind) {
      case ExprKind::Add:
        check_cost_atoms(e.kids[0], negated, range);
        check_cost_atoms(e.kids[1], negated, range);
        return;
      case ExprKind::Sub:
        check_cost_atoms(e.kids[0], negated, range);
        check_cost_atoms(e.kids[1], !negated, range);
        return;
      case ExprKind::Neg:
        check_cost_atoms(e.kids[0], !negated, range);
        return;
      case ExprKind::Norm:
        if (negated)
          throw NonConvexConstruct(e.pos, "negated norm in the objective");
        return;
      default:
        if (contains_norm(e))
          throw NonConvexConstruct(
              e.pos, "norm may only appear as a standalone objective atom");
        return;
    }
  }

  void validate() const {
    for (const CostTerm& t : model_.cost) {
      const Shape s = check_expr(t.expr, t.range);
      if (s.rows != 1 || s.cols != 1)
        throw DimensionMismatch(t.expr.pos,
                                "objective must be scalar, got " + shape_str(s));
      check_cost_atoms(t.expr, false, t.range);
    }
    for (const ConstraintGroup& g : model_.constraints) {
      const Shape a = check_expr(g.lhs, g.range);
      const Shape b = check_expr(g.rhs, g.range);
      if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatch(g.pos, "constraint '" + g.name +
                                           "': shape mismatch " + shape_str(a) +
                                           " vs " + shape_str(b));
      const bool norm_l = contains_norm(g.lhs);
      const bool norm_r = contains_norm(g.rhs);
      if (g.rel == Relation::Eq && (norm_l || norm_r))
        throw NonConvexConstruct(
            g.pos, "constraint '" + g.name + "': norm in an equality");
      if (g.rel == Relation::Le && norm_l && g.lhs.kind != ExprKind::Norm)
        throw NonConvexConstruct(g.pos, "constraint '" + g.name +
                                            "': norm must be the whole "
                                            "left-hand side");
      if (g.rel == Relation::Ge && norm_r && g.rhs.kind != ExprKind::Norm)
        throw NonConvexConstruct(g.pos, "constraint '" + g.name +
                                            "': norm must be the whole "
                                            "right-hand side");
      if (g.rel == Relation::Le && norm_r)
        throw NonConvexConstruct(g.pos, "constraint '" + g.name +
                                            "': norm on the greater side");
      if (g.rel == Relation::Ge && norm_l)
        throw NonConvexConstruct(g.pos, "constraint '" + g.name +
                                            "': norm on the greater side");
    }
    if (model_.output) {
      if (model_.output->kind != ExprKind::SliceRef)
        throw SyntaxError(model_.output->pos,
                          "output must be a variable slice");
      check_expr(*model_.output, std::nullopt);
    }
  }
};

// ---- pretty printing ----

void print_index(std::string& out, const IndexExpr& ix) {
  if (ix.colon) {
    out += ":";
    return;
  }
  std::string s;
  if (ix.coef_k != 0) {
    if (ix.coef_k == -1)
      s += "-" + ix.var;
    else if (ix.coef_k == 1)
      s += ix.var;
    else
      s += std::to_string(ix.coef_k) + "*" + ix.var;
    if (ix.offset > 0) s += "+" + std::to_string(ix.offset);
    if (ix.offset < 0) s += std::to_string(ix.offset);
  } else {
    s = std::to_string(ix.offset);
  }
  out += s;
}

void print_expr(std::string& out, const Expr& e, bool parens_for_add) {
  switch (e.kind) {
    case ExprKind::Number:
      out += shortest_double(e.number);
      return;
    case ExprKind::ConstRef:
    case ExprKind::InputRef:
      out += e.name;
      return;
    case ExprKind::SliceRef:
      out += e.name;
      out += "(";
      print_index(out, e.row);
      out += ",";
      print_index(out, e.col);
      out += ")";
      return;
    case ExprKind::Neg:
      out += "-";
      print_expr(out, e.kids[0], true);
      return;
    case ExprKind::Add:
    case ExprKind::Sub: {
      if (parens_for_add) out += "(";
      print_expr(out, e.kids[0], false);
      out += e.kind == ExprKind::Add ? " + " : " - ";
      print_expr(out, e.kids[1], true);
      if (parens_for_add) out += ")";
      return;
    }
    case ExprKind::Mul:
      print_expr(out, e.kids[0], true);
      out += "*";
      print_expr(out, e.kids[1], true);
      return;
    case ExprKind::Norm:
      out += "|| ";
      print_expr(out, e.kids[0], false);
      out += " ||";
      return;
  }
}

}  // namespace

MpcModel parse(const std::string& text) { return Parser(text).run(); }

std::string pretty_print(const MpcModel& m) {
  std::string out;
  out += "Input\n" + m.input_name + "(" + std::to_string(m.input_dim) + ")\n";
  out += "Output\n";
  if (m.output) {
    print_expr(out, *m.output, false);
    out += "\n";
  }
  out += "Constants\n";
  for (const ConstantDef& c : m.constants) {
    out += c.name + " = ";
    if (c.is_matrix) {
      out += "[";
      for (std::size_t i = 0; i < c.matrix.rows(); ++i) {
        if (i) out += "; ";
        for (std::size_t j = 0; j < c.matrix.cols(); ++j) {
          if (j) out += " ";
          out += shortest_double(c.matrix(i, j));
        }
      }
      out += "]";
    } else {
      out += shortest_double(c.scalar);
    }
    out += ";\n";
  }
  out += "Variables\n";
  for (const VariableDecl& v : m.variables)
    out += v.name + "(" + std::to_string(v.rows) + "," +
           std::to_string(v.cols) + ") ";
  out += "\nMinimize\n";
  for (std::size_t i = 0; i < m.cost.size(); ++i) {
    if (i) out += " + ";
    const CostTerm& t = m.cost[i];
    if (t.range) {
      out += "sum( ";
      print_expr(out, t.expr, false);
      out += " , " + t.range->var + " = " + std::to_string(t.range->lo) +
             ".." + std::to_string(t.range->hi) + " )";
    } else {
      print_expr(out, t.expr, false);
    }
  }
  out += "\nSubjectTo\n";
  for (const ConstraintGroup& g : m.constraints) {
    out += g.name + ": ";
    print_expr(out, g.lhs, false);
    switch (g.rel) {
      case Relation::Eq: out += " = "; break;
      case Relation::Le: out += " <= "; break;
      case Relation::Ge: out += " >= "; break;
    }
    print_expr(out, g.rhs, false);
    if (g.range)
      out += " ," + g.range->var + "=" + std::to_string(g.range->lo) + ".." +
             std::to_string(g.range->hi);
    out += ";\n";
  }
  out += "Information\n";
  for (const auto& [key, value] : m.information)
    out += key + " = " + shortest_double(value) + "; ";
  out += "\n";
  return out;
}

}  // namespace ellcert::mpc
