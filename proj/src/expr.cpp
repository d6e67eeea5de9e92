#include "varicon/expr.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace varicon {

struct Expr::Factory {
  static ExprPtr literal(double v) {
    auto e = std::shared_ptr<Expr>(new Expr());
    e->kind_ = Kind::Literal;
    e->literal_ = v;
    return e;
  }

  static ExprPtr parameter(int index, std::string name) {
    auto e = std::shared_ptr<Expr>(new Expr());
    e->kind_ = Kind::Param;
    e->index_ = index;
    e->name_ = std::move(name);
    return e;
  }

  static ExprPtr base(int mu) {
    auto e = std::shared_ptr<Expr>(new Expr());
    e->kind_ = Kind::Base;
    e->index_ = mu;
    return e;
  }

  static ExprPtr jet_coord(JetCoord c, std::string field_name) {
    auto e = std::shared_ptr<Expr>(new Expr());
    e->kind_ = Kind::Jet;
    e->coord_ = c;
    e->name_ = std::move(field_name);
    e->jet_order_ = c.order();
    return e;
  }

  static ExprPtr unary(UnaryOp op, ExprPtr a) {
    auto e = std::shared_ptr<Expr>(new Expr());
    e->kind_ = Kind::Unary;
    e->unary_ = op;
    e->jet_order_ = a->jet_order();
    e->a_ = std::move(a);
    return e;
  }

  static ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b) {
    auto e = std::shared_ptr<Expr>(new Expr());
    e->kind_ = Kind::Binary;
    e->binary_ = op;
    e->jet_order_ = std::max(a->jet_order(), b->jet_order());
    e->a_ = std::move(a);
    e->b_ = std::move(b);
    return e;
  }
};

namespace {

using Kind = Expr::Kind;
using UnaryOp = Expr::UnaryOp;
using BinaryOp = Expr::BinaryOp;

bool is_literal(const ExprPtr& e, double v) {
  return e->kind() == Kind::Literal && e->literal() == v;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : v < 0.0 ? -1.0 : 0.0; }

}  // namespace

ExprPtr lit(double value) {
  if (!std::isfinite(value)) throw EvalError("literal must be finite");
  return Expr::Factory::literal(value);
}

ExprPtr param(const Space& space, std::string_view name) {
  const int idx = space.param_index(name);
  if (idx < 0) throw SchemaError("unknown parameter '" + std::string(name) + "'");
  return Expr::Factory::parameter(idx, std::string(name));
}

ExprPtr base_coord(int mu) {
  if (mu < 0) throw SchemaError("base-coordinate index must be nonnegative");
  return Expr::Factory::base(mu);
}

ExprPtr jet(const Space& space, std::string_view field, MultiIndex mi) {
  const int idx = space.field_index(field);
  if (idx < 0) throw SchemaError("unknown field '" + std::string(field) + "'");
  for (int k = 0; k < mi.order(); ++k)
    if (mi[k] >= space.base_dim())
      throw SchemaError("derivative index exceeds base dimension");
  return Expr::Factory::jet_coord(JetCoord{idx, mi}, std::string(field));
}

bool is_zero(const ExprPtr& e) { return is_literal(e, 0.0); }
bool is_one(const ExprPtr& e) { return is_literal(e, 1.0); }

ExprPtr add(ExprPtr a, ExprPtr b) {
  if (a->kind() == Kind::Literal && b->kind() == Kind::Literal) {
    const double v = a->literal() + b->literal();
    if (std::isfinite(v)) return lit(v);
  }
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  return Expr::Factory::binary(BinaryOp::Add, std::move(a), std::move(b));
}

ExprPtr sub(ExprPtr a, ExprPtr b) {
  if (a->kind() == Kind::Literal && b->kind() == Kind::Literal) {
    const double v = a->literal() - b->literal();
    if (std::isfinite(v)) return lit(v);
  }
  if (is_zero(b)) return a;
  if (is_zero(a)) return neg(std::move(b));
  return Expr::Factory::binary(BinaryOp::Sub, std::move(a), std::move(b));
}

ExprPtr mul(ExprPtr a, ExprPtr b) {
  if (a->kind() == Kind::Literal && b->kind() == Kind::Literal) {
    const double v = a->literal() * b->literal();
    if (std::isfinite(v)) return lit(v);
  }
  if (is_zero(a) || is_zero(b)) return lit(0.0);
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  return Expr::Factory::binary(BinaryOp::Mul, std::move(a), std::move(b));
}

ExprPtr div(ExprPtr a, ExprPtr b) {
  if (a->kind() == Kind::Literal && b->kind() == Kind::Literal && b->literal() != 0.0) {
    const double v = a->literal() / b->literal();
    if (std::isfinite(v)) return lit(v);
  }
  if (is_zero(a)) return lit(0.0);
  if (is_one(b)) return a;
  return Expr::Factory::binary(BinaryOp::Div, std::move(a), std::move(b));
}

ExprPtr pow(ExprPtr a, ExprPtr b) {
  if (is_one(b)) return a;
  if (is_zero(b)) return lit(1.0);  // matches std::pow(v, 0) == 1 for every v
  if (a->kind() == Kind::Literal && b->kind() == Kind::Literal) {
    const double v = std::pow(a->literal(), b->literal());
    if (std::isfinite(v)) return lit(v);
  }
  return Expr::Factory::binary(BinaryOp::Pow, std::move(a), std::move(b));
}

ExprPtr neg(ExprPtr a) {
  if (a->kind() == Kind::Literal) return lit(-a->literal());
  if (a->kind() == Kind::Unary && a->unary_op() == UnaryOp::Neg) return a->child();
  return Expr::Factory::unary(UnaryOp::Neg, std::move(a));
}

ExprPtr sin(ExprPtr a) {
  if (a->kind() == Kind::Literal) return lit(std::sin(a->literal()));
  return Expr::Factory::unary(UnaryOp::Sin, std::move(a));
}

ExprPtr cos(ExprPtr a) {
  if (a->kind() == Kind::Literal) return lit(std::cos(a->literal()));
  return Expr::Factory::unary(UnaryOp::Cos, std::move(a));
}

ExprPtr sqrt(ExprPtr a) {
  if (a->kind() == Kind::Literal && a->literal() >= 0.0)
    return lit(std::sqrt(a->literal()));
  return Expr::Factory::unary(UnaryOp::Sqrt, std::move(a));
}

ExprPtr abs(ExprPtr a) {
  if (a->kind() == Kind::Literal) return lit(std::fabs(a->literal()));
  return Expr::Factory::unary(UnaryOp::Abs, std::move(a));
}

ExprPtr sign(ExprPtr a) {
  if (a->kind() == Kind::Literal) return lit(sign_of(a->literal()));
  return Expr::Factory::unary(UnaryOp::Sign, std::move(a));
}

// --- derivatives -------------------------------------------------------------

namespace {

// Differentiation target: one jet coordinate, or one base coordinate.
struct Target {
  bool is_base = false;
  JetCoord coord;
  int mu = -1;
};

bool has_variables(const ExprPtr& e) {
  switch (e->kind()) {
    case Kind::Literal:
    case Kind::Param:
      return false;
    case Kind::Base:
    case Kind::Jet:
      return true;
    case Kind::Unary:
      return has_variables(e->child());
    case Kind::Binary:
      return has_variables(e->lhs()) || has_variables(e->rhs());
  }
  return false;
}

ExprPtr d(const ExprPtr& e, const Target& t) {
  switch (e->kind()) {
    case Kind::Literal:
    case Kind::Param:
      return lit(0.0);
    case Kind::Base:
      return lit(t.is_base && e->base_index() == t.mu ? 1.0 : 0.0);
    case Kind::Jet:
      return lit(!t.is_base && e->jet_coord() == t.coord ? 1.0 : 0.0);
    case Kind::Unary: {
      const ExprPtr& u = e->child();
      ExprPtr du = d(u, t);
      switch (e->unary_op()) {
        case UnaryOp::Neg:
          return neg(du);
        case UnaryOp::Sin:
          return cos(u) * du;
        case UnaryOp::Cos:
          return neg(sin(u)) * du;
        case UnaryOp::Sqrt:
          return du / (lit(2.0) * sqrt(u));
        case UnaryOp::Abs:
          return sign(u) * du;
        case UnaryOp::Sign:
          return lit(0.0);  // flat away from the kink; kinks are excluded domains
      }
      break;
    }
    case Kind::Binary: {
      const ExprPtr& a = e->lhs();
      const ExprPtr& b = e->rhs();
      switch (e->binary_op()) {
        case BinaryOp::Add:
          return d(a, t) + d(b, t);
        case BinaryOp::Sub:
          return d(a, t) - d(b, t);
        case BinaryOp::Mul:
          return d(a, t) * b + a * d(b, t);
        case BinaryOp::Div:
          return (d(a, t) * b - a * d(b, t)) / (b * b);
        case BinaryOp::Pow: {
          if (!is_zero(d(b, t)))
            throw Error(
                "cannot differentiate a power whose exponent depends on the "
                "differentiation variable (the expression language has no "
                "logarithm)");
          ExprPtr da = d(a, t);
          if (is_zero(da)) return lit(0.0);
          return b * pow(a, b - lit(1.0)) * da;
        }
      }
      break;
    }
  }
  return lit(0.0);
}

ExprPtr total_derivative(const ExprPtr& e, int mu) {
  switch (e->kind()) {
    case Kind::Literal:
    case Kind::Param:
      return lit(0.0);
    case Kind::Base:
      return lit(e->base_index() == mu ? 1.0 : 0.0);
    case Kind::Jet: {
      JetCoord raised{e->jet_coord().field,
                      MultiIndex::raised(e->jet_coord().index, mu)};
      return Expr::Factory::jet_coord(raised, e->name());
    }
    case Kind::Unary: {
      const ExprPtr& u = e->child();
      ExprPtr du = total_derivative(u, mu);
      switch (e->unary_op()) {
        case UnaryOp::Neg:
          return neg(du);
        case UnaryOp::Sin:
          return cos(u) * du;
        case UnaryOp::Cos:
          return neg(sin(u)) * du;
        case UnaryOp::Sqrt:
          return du / (lit(2.0) * sqrt(u));
        case UnaryOp::Abs:
          return sign(u) * du;
        case UnaryOp::Sign:
          return lit(0.0);
      }
      break;
    }
    case Kind::Binary: {
      const ExprPtr& a = e->lhs();
      const ExprPtr& b = e->rhs();
      switch (e->binary_op()) {
        case BinaryOp::Add:
          return total_derivative(a, mu) + total_derivative(b, mu);
        case BinaryOp::Sub:
          return total_derivative(a, mu) - total_derivative(b, mu);
        case BinaryOp::Mul:
          return total_derivative(a, mu) * b + a * total_derivative(b, mu);
        case BinaryOp::Div:
          return (total_derivative(a, mu) * b - a * total_derivative(b, mu)) /
                 (b * b);
        case BinaryOp::Pow:
          if (has_variables(b))
            throw Error(
                "cannot differentiate a power with a non-constant exponent "
                "(the expression language has no logarithm)");
          return b * pow(a, b - lit(1.0)) * total_derivative(a, mu);
      }
      break;
    }
  }
  return lit(0.0);
}

}  // namespace

ExprPtr diff(const ExprPtr& e, const JetCoord& c) {
  Target t;
  t.is_base = false;
  t.coord = c;
  return d(e, t);
}

ExprPtr diff_base(const ExprPtr& e, int mu) {
  Target t;
  t.is_base = true;
  t.mu = mu;
  return d(e, t);
}

ExprPtr formal_derivative(const ExprPtr& e, int mu) {
  if (mu < 0) throw SchemaError("base-coordinate index must be nonnegative");
  if (e->jet_order() > kMaxJetOrder - 1)
    throw OrderError("order overflow (result would need order-4 jets)");
  return total_derivative(e, mu);
}

// --- evaluation ---------------------------------------------------------------

namespace {

double eval_node(const Expr& e, const JetPoint& p, std::span<const double> params) {
  switch (e.kind()) {
    case Kind::Literal:
      return e.literal();
    case Kind::Param: {
      const int i = e.param_index();
      if (i < 0 || static_cast<std::size_t>(i) >= params.size())
        throw EvalError("no binding for parameter '" + e.name() + "'");
      return params[static_cast<std::size_t>(i)];
    }
    case Kind::Base:
      return p.base(e.base_index());
    case Kind::Jet:
      return p.coord(e.jet_coord());
    case Kind::Unary: {
      const double v = eval_node(*e.child(), p, params);
      switch (e.unary_op()) {
        case UnaryOp::Neg:
          return -v;
        case UnaryOp::Sin:
          return std::sin(v);
        case UnaryOp::Cos:
          return std::cos(v);
        case UnaryOp::Sqrt: {
          if (v < 0.0) throw EvalError("sqrt of a negative value");
          return std::sqrt(v);
        }
        case UnaryOp::Abs:
          return std::fabs(v);
        case UnaryOp::Sign:
          return sign_of(v);
      }
      break;
    }
    case Kind::Binary: {
      const double a = eval_node(*e.lhs(), p, params);
      const double b = eval_node(*e.rhs(), p, params);
      switch (e.binary_op()) {
        case BinaryOp::Add:
          return a + b;
        case BinaryOp::Sub:
          return a - b;
        case BinaryOp::Mul:
          return a * b;
        case BinaryOp::Div: {
          const double v = a / b;
          if (!std::isfinite(v)) throw EvalError("division produced a non-finite value");
          return v;
        }
        case BinaryOp::Pow: {
          const double v = std::pow(a, b);
          if (!std::isfinite(v)) throw EvalError("power produced a non-finite value");
          return v;
        }
      }
      break;
    }
  }
  throw EvalError("malformed expression node");
}

}  // namespace

double eval(const ExprPtr& e, const JetPoint& p, std::span<const double> params) {
  const double v = eval_node(*e, p, params);
  if (!std::isfinite(v)) throw EvalError("expression evaluated to a non-finite value");
  return v;
}

double eval(const ExprPtr& e, const JetPoint& p) {
  return eval(e, p, std::span<const double>{});
}

// --- printing -----------------------------------------------------------------

namespace {

// Higher binds tighter.  Matches the parser: ^ above unary minus above */
// above +-.
int precedence(const Expr& e) {
  switch (e.kind()) {
    case Kind::Binary:
      switch (e.binary_op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
          return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div:
          return 2;
        case BinaryOp::Pow:
          return 4;
      }
      return 1;
    case Kind::Unary:
      return e.unary_op() == UnaryOp::Neg ? 3 : 5;
    default:
      return 5;
  }
}

std::string format_literal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print_node(const Expr& e, std::string& out);

void print_child(const ExprPtr& c, int parent_prec, bool tight_side, std::string& out) {
  // tight_side: the operand position that needs parentheses already at equal
  // precedence (right side of -, /, left side of the right-associative ^).
  const int cp = precedence(*c);
  const bool negative_literal = c->kind() == Kind::Literal && std::signbit(c->literal());
  const bool parens = cp < parent_prec || (tight_side && cp == parent_prec) ||
                      (parent_prec == 4 && negative_literal);
  if (parens) out += '(';
  print_node(*c, out);
  if (parens) out += ')';
}

void print_node(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Kind::Literal:
      out += format_literal(e.literal());
      return;
    case Kind::Param:
      out += e.name();
      return;
    case Kind::Base:
      out += "x" + std::to_string(e.base_index());
      return;
    case Kind::Jet: {
      std::string inner = e.name();
      for (int k = 0; k < e.jet_coord().index.order(); ++k)
        inner = "d(" + inner + ", " + std::to_string(e.jet_coord().index[k]) + ")";
      out += inner;
      return;
    }
    case Kind::Unary: {
      const char* fn = nullptr;
      switch (e.unary_op()) {
        case UnaryOp::Neg: {
          out += '-';
          print_child(e.child(), 3, true, out);
          return;
        }
        case UnaryOp::Sin:
          fn = "sin";
          break;
        case UnaryOp::Cos:
          fn = "cos";
          break;
        case UnaryOp::Sqrt:
          fn = "sqrt";
          break;
        case UnaryOp::Abs:
          fn = "abs";
          break;
        case UnaryOp::Sign:
          fn = "sign";
          break;
      }
      out += fn;
      out += '(';
      print_node(*e.child(), out);
      out += ')';
      return;
    }
    case Kind::Binary: {
      const int prec = precedence(e);
      const char* op = nullptr;
      bool left_tight = false, right_tight = true;
      switch (e.binary_op()) {
        case BinaryOp::Add:
          op = " + ";
          break;
        case BinaryOp::Sub:
          op = " - ";
          break;
        case BinaryOp::Mul:
          op = "*";
          break;
        case BinaryOp::Div:
          op = "/";
          break;
        case BinaryOp::Pow:
          op = "^";
          left_tight = true;
          right_tight = false;  // right-associative
          break;
      }
      print_child(e.lhs(), prec, left_tight, out);
      out += op;
      print_child(e.rhs(), prec, right_tight, out);
      return;
    }
  }
}

}  // namespace

std::string to_string(const ExprPtr& e) {
  std::string out;
  print_node(*e, out);
  return out;
}

// --- structure ----------------------------------------------------------------

namespace {

void collect(const ExprPtr& e, std::set<JetCoord>& out) {
  switch (e->kind()) {
    case Kind::Jet:
      out.insert(e->jet_coord());
      return;
    case Kind::Unary:
      collect(e->child(), out);
      return;
    case Kind::Binary:
      collect(e->lhs(), out);
      collect(e->rhs(), out);
      return;
    default:
      return;
  }
}

}  // namespace

std::set<JetCoord> jet_coords(const ExprPtr& e) {
  std::set<JetCoord> out;
  collect(e, out);
  return out;
}

bool depends_on(const ExprPtr& e, const JetCoord& c) {
  switch (e->kind()) {
    case Kind::Jet:
      return e->jet_coord() == c;
    case Kind::Unary:
      return depends_on(e->child(), c);
    case Kind::Binary:
      return depends_on(e->lhs(), c) || depends_on(e->rhs(), c);
    default:
      return false;
  }
}

namespace {

template <typename Leaf>
ExprPtr rebuild(const ExprPtr& e, const Leaf& leaf) {
  switch (e->kind()) {
    case Kind::Literal:
    case Kind::Param:
    case Kind::Base:
    case Kind::Jet:
      return leaf(e);
    case Kind::Unary: {
      ExprPtr c = rebuild(e->child(), leaf);
      if (c == e->child()) return e;
      switch (e->unary_op()) {
        case UnaryOp::Neg:
          return neg(c);
        case UnaryOp::Sin:
          return sin(c);
        case UnaryOp::Cos:
          return cos(c);
        case UnaryOp::Sqrt:
          return sqrt(c);
        case UnaryOp::Abs:
          return abs(c);
        case UnaryOp::Sign:
          return sign(c);
      }
      break;
    }
    case Kind::Binary: {
      ExprPtr a = rebuild(e->lhs(), leaf);
      ExprPtr b = rebuild(e->rhs(), leaf);
      if (a == e->lhs() && b == e->rhs()) return e;
      switch (e->binary_op()) {
        case BinaryOp::Add:
          return add(a, b);
        case BinaryOp::Sub:
          return sub(a, b);
        case BinaryOp::Mul:
          return mul(a, b);
        case BinaryOp::Div:
          return div(a, b);
        case BinaryOp::Pow:
          return pow(a, b);
      }
      break;
    }
  }
  return e;
}

}  // namespace

ExprPtr substitute_value(const ExprPtr& e, int field, const ExprPtr& repl) {
  return rebuild(e, [&](const ExprPtr& leaf) -> ExprPtr {
    if (leaf->kind() == Kind::Jet && leaf->jet_coord().field == field &&
        leaf->jet_coord().order() == 0)
      return repl;
    return leaf;
  });
}

ExprPtr substitute_coord(const ExprPtr& e, const JetCoord& c, double value) {
  return rebuild(e, [&](const ExprPtr& leaf) -> ExprPtr {
    if (leaf->kind() == Kind::Jet && leaf->jet_coord() == c) return lit(value);
    return leaf;
  });
}

ExprPtr bind_params(const ExprPtr& e, std::span<const double> params) {
  return rebuild(e, [&](const ExprPtr& leaf) -> ExprPtr {
    if (leaf->kind() == Kind::Param) {
      const int i = leaf->param_index();
      if (i < 0 || static_cast<std::size_t>(i) >= params.size())
        throw EvalError("no binding for parameter '" + leaf->name() + "'");
      return lit(params[static_cast<std::size_t>(i)]);
    }
    return leaf;
  });
}

}  // namespace varicon
