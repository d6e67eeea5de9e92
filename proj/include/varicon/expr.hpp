#pragma once

#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "varicon/jet_point.hpp"
#include "varicon/space.hpp"

namespace varicon {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression tree over one fibered chart.  Leaves are literals,
// named parameters, base coordinates, and jet coordinates; interior nodes
// are the usual arithmetic and a small set of analytic functions.  Nodes are
// shared freely between trees, so everything here is read-only after
// construction and safe to evaluate from several threads at once.
class Expr {
 public:
  enum class Kind { Literal, Param, Base, Jet, Unary, Binary };
  enum class UnaryOp { Neg, Sin, Cos, Sqrt, Abs, Sign };
  enum class BinaryOp { Add, Sub, Mul, Div, Pow };

  Kind kind() const noexcept { return kind_; }
  int jet_order() const noexcept { return jet_order_; }

  double literal() const noexcept { return literal_; }
  int param_index() const noexcept { return index_; }
  int base_index() const noexcept { return index_; }
  const std::string& name() const noexcept { return name_; }
  const JetCoord& jet_coord() const noexcept { return coord_; }
  UnaryOp unary_op() const noexcept { return unary_; }
  BinaryOp binary_op() const noexcept { return binary_; }
  const ExprPtr& lhs() const noexcept { return a_; }
  const ExprPtr& rhs() const noexcept { return b_; }
  const ExprPtr& child() const noexcept { return a_; }

  // Factories below are the only intended way to build nodes; they fold
  // literal subtrees and absorb additive/multiplicative identities.
  struct Factory;

 private:
  Expr() = default;

  Kind kind_ = Kind::Literal;
  double literal_ = 0.0;
  int index_ = -1;
  std::string name_;
  JetCoord coord_;
  UnaryOp unary_ = UnaryOp::Neg;
  BinaryOp binary_ = BinaryOp::Add;
  ExprPtr a_, b_;
  int jet_order_ = 0;

  friend struct Factory;
};

// --- leaf factories ---------------------------------------------------------

ExprPtr lit(double value);
ExprPtr param(const Space& space, std::string_view name);
ExprPtr base_coord(int mu);
// Jet coordinate of a named field; an empty multi-index is the field value.
ExprPtr jet(const Space& space, std::string_view field, MultiIndex mi = {});

// --- combinators (fold constants, absorb 0 and 1) ---------------------------

ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr pow(ExprPtr a, ExprPtr b);
ExprPtr neg(ExprPtr a);
ExprPtr sin(ExprPtr a);
ExprPtr cos(ExprPtr a);
ExprPtr sqrt(ExprPtr a);
ExprPtr abs(ExprPtr a);
ExprPtr sign(ExprPtr a);

inline ExprPtr operator+(ExprPtr a, ExprPtr b) { return add(std::move(a), std::move(b)); }
inline ExprPtr operator-(ExprPtr a, ExprPtr b) { return sub(std::move(a), std::move(b)); }
inline ExprPtr operator*(ExprPtr a, ExprPtr b) { return mul(std::move(a), std::move(b)); }
inline ExprPtr operator/(ExprPtr a, ExprPtr b) { return div(std::move(a), std::move(b)); }
inline ExprPtr operator-(ExprPtr a) { return neg(std::move(a)); }

bool is_zero(const ExprPtr& e);
bool is_one(const ExprPtr& e);

// --- calculus ----------------------------------------------------------------

// Partial derivative with respect to one jet coordinate, all other jet
// coordinates held fixed.  Returns the zero expression when c is absent.
ExprPtr diff(const ExprPtr& e, const JetCoord& c);

// Partial derivative with respect to the base coordinate x^mu (explicit
// dependence only).
ExprPtr diff_base(const ExprPtr& e, int mu);

// Total derivative along x^mu: base partial plus the chain-rule sum over all
// jet coordinates, each raised by mu.  Requires jet_order(e) <= 2.
ExprPtr formal_derivative(const ExprPtr& e, int mu);

// --- evaluation and inspection ----------------------------------------------

double eval(const ExprPtr& e, const JetPoint& p, std::span<const double> params);
double eval(const ExprPtr& e, const JetPoint& p);

// Canonical text form; reparsing it in the same space yields an expression
// with identical values.
std::string to_string(const ExprPtr& e);

// All jet coordinates appearing in e.
std::set<JetCoord> jet_coords(const ExprPtr& e);

bool depends_on(const ExprPtr& e, const JetCoord& c);

// Replace every occurrence of the order-0 coordinate of `field` by `repl`.
ExprPtr substitute_value(const ExprPtr& e, int field, const ExprPtr& repl);

// Replace one jet coordinate (any order) by a constant.
ExprPtr substitute_coord(const ExprPtr& e, const JetCoord& c, double value);

// Replace parameter leaves by their bound values and refold.  Evaluating the
// result needs no parameter bindings.
ExprPtr bind_params(const ExprPtr& e, std::span<const double> params);

}  // namespace varicon
