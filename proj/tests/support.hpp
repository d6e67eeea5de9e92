#pragma once

// Shared helpers for the test suites: deterministic random jet data, a
// random expression generator biased away from singular configurations, and
// finite-difference oracles used to cross-check the symbolic derivatives.

#include <cmath>
#include <vector>

#include "varicon/expr.hpp"
#include "varicon/jet_point.hpp"
#include "varicon/rng.hpp"

namespace vtest {

inline varicon::JetPoint random_jet_point(const varicon::Space& s, int order,
                                          varicon::Rng& rng, double lo = -1.5,
                                          double hi = 1.5) {
  varicon::JetPoint p(s.base_dim(), s.field_count(), order);
  for (int mu = 0; mu < s.base_dim(); ++mu) p.set_base(mu, rng.uniform(lo, hi));
  for (int f = 0; f < s.field_count(); ++f) {
    p.set_coord({f, {}}, rng.uniform(lo, hi));
    if (order >= 1)
      for (int a = 0; a < s.base_dim(); ++a)
        p.set_coord({f, {a}}, rng.uniform(lo, hi));
    if (order >= 2)
      for (int a = 0; a < s.base_dim(); ++a)
        for (int b = a; b < s.base_dim(); ++b)
          p.set_coord({f, {a, b}}, rng.uniform(lo, hi));
    if (order >= 3)
      for (int a = 0; a < s.base_dim(); ++a)
        for (int b = a; b < s.base_dim(); ++b)
          for (int c = b; c < s.base_dim(); ++c)
            p.set_coord({f, {a, b, c}}, rng.uniform(lo, hi));
  }
  return p;
}

// Central finite difference in one jet coordinate.
inline double fd_coord(const varicon::ExprPtr& e, const varicon::JetPoint& p,
                       std::span<const double> params, const varicon::JetCoord& c,
                       double h = 1e-5) {
  varicon::JetPoint hi = p, lo = p;
  hi.set_coord(c, p.coord(c) + h);
  lo.set_coord(c, p.coord(c) - h);
  return (varicon::eval(e, hi, params) - varicon::eval(e, lo, params)) / (2.0 * h);
}

// Central finite difference in one base coordinate (explicit dependence).
inline double fd_base(const varicon::ExprPtr& e, const varicon::JetPoint& p,
                      std::span<const double> params, int mu, double h = 1e-5) {
  varicon::JetPoint hi = p, lo = p;
  hi.set_base(mu, p.base(mu) + h);
  lo.set_base(mu, p.base(mu) - h);
  return (varicon::eval(e, hi, params) - varicon::eval(e, lo, params)) / (2.0 * h);
}

inline bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Random expression trees for differentiation and round-trip properties.
// Division, sqrt and abs are wrapped so their arguments stay away from the
// singular set at the sampling ranges used by the suites.
class ExprGen {
 public:
  ExprGen(const varicon::Space& space, varicon::Rng& rng, int max_jet_order = 2)
      : space_(space), rng_(rng), max_jet_order_(max_jet_order) {}

  varicon::ExprPtr gen(int depth) {
    using namespace varicon;
    if (depth <= 0) return leaf();
    switch (rng_.next_below(9)) {
      case 0:
        return add(gen(depth - 1), gen(depth - 1));
      case 1:
        return sub(gen(depth - 1), gen(depth - 1));
      case 2:
        return mul(gen(depth - 1), gen(depth - 1));
      case 3: {  // denominator bounded below by 2
        ExprPtr v = gen(depth - 1);
        return div(gen(depth - 1), lit(2.0) + mul(v, v));
      }
      case 4:
        return sin(gen(depth - 1));
      case 5:
        return cos(gen(depth - 1));
      case 6: {  // argument bounded below by 1
        ExprPtr v = gen(depth - 1);
        return sqrt(lit(1.0) + mul(v, v));
      }
      case 7:
        return neg(gen(depth - 1));
      default: {  // small integer power
        ExprPtr v = gen(depth - 1);
        return pow(v, lit(static_cast<double>(2 + rng_.next_below(2))));
      }
    }
  }

 private:
  varicon::ExprPtr leaf() {
    using namespace varicon;
    switch (rng_.next_below(4)) {
      case 0:
        return lit(rng_.uniform(0.5, 2.0));
      case 1:
        if (space_.param_count() > 0)
          return param(space_, space_.param_name(rng_.next_below(space_.param_count())));
        [[fallthrough]];
      case 2:
        return base_coord(rng_.next_below(space_.base_dim()));
      default: {
        const int f = rng_.next_below(space_.field_count());
        const int k = rng_.next_below(max_jet_order_ + 1);
        MultiIndex mi;
        for (int j = 0; j < k; ++j)
          mi = MultiIndex::raised(mi, rng_.next_below(space_.base_dim()));
        return jet(space_, space_.field_name(f), mi);
      }
    }
  }

  const varicon::Space& space_;
  varicon::Rng& rng_;
  int max_jet_order_;
};

// Sets `target` on `p` so the affine equation `eq` vanishes there.  Probes
// the two coefficients numerically; callers guarantee the linear coefficient
// is bounded away from zero.
inline void solve_affine_for(varicon::JetPoint& p, const varicon::ExprPtr& eq,
                             const varicon::JetCoord& target,
                             std::span<const double> params = {}) {
  p.set_coord(target, 0.0);
  const double r0 = varicon::eval(eq, p, params);
  p.set_coord(target, 1.0);
  const double slope = varicon::eval(eq, p, params) - r0;
  p.set_coord(target, -r0 / slope);
}

// Random jet point on the prolonged skating constraint: the blade constraint
// and its total derivatives vanish up to the point's order.  Heading stays
// away from both the poles and zero, and the along-blade speed away from
// zero, so every denominator the suites divide by is bounded below.
inline varicon::JetPoint blade_admissible_point(const varicon::Space& s, int order,
                                                varicon::Rng& rng) {
  using namespace varicon;
  JetPoint p(1, 3, order);
  p.set_base(0, rng.uniform(-1.5, 1.5));
  p.set_coord({0, {}}, rng.uniform(-1.5, 1.5));
  p.set_coord({1, {}}, rng.uniform(-1.5, 1.5));
  const double sign_th = rng.next_below(2) ? 1.0 : -1.0;
  const double theta = sign_th * rng.uniform(0.3, 1.2);
  p.set_coord({2, {}}, theta);
  if (order < 1) return p;

  const double v = (rng.next_below(2) ? 1.0 : -1.0) * rng.uniform(0.4, 2.0);
  p.set_coord({0, {0}}, v * std::cos(theta));
  p.set_coord({1, {0}}, v * std::sin(theta));
  p.set_coord({2, {0}}, (rng.next_below(2) ? 1.0 : -1.0) * rng.uniform(0.3, 1.0));
  if (order < 2) return p;

  const ExprPtr phi =
      jet(s, "x", {0}) * sin(jet(s, "theta")) - jet(s, "y", {0}) * cos(jet(s, "theta"));
  p.set_coord({0, {0, 0}}, rng.uniform(-1.5, 1.5));
  p.set_coord({2, {0, 0}}, rng.uniform(-1.5, 1.5));
  p.set_coord({1, {0, 0}}, 0.0);
  solve_affine_for(p, formal_derivative(phi, 0), {1, {0, 0}});
  if (order < 3) return p;

  p.set_coord({0, {0, 0, 0}}, rng.uniform(-1.5, 1.5));
  p.set_coord({2, {0, 0, 0}}, rng.uniform(-1.5, 1.5));
  p.set_coord({1, {0, 0, 0}}, 0.0);
  solve_affine_for(p, formal_derivative(formal_derivative(phi, 0), 0), {1, {0, 0, 0}});
  return p;
}

}  // namespace vtest
