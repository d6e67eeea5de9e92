#include "varicon/multiplier.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "varicon/errors.hpp"
#include "varicon/paramvar.hpp"
#include "varicon/rng.hpp"

namespace varicon {

namespace {

SpacePtr extend_with_multipliers(const ConstraintSet& S) {
  const Space& sp = *S.space();
  if (sp.base_dim() != 1) {
    throw Error("multiplier systems are built for one base dimension, got " +
                std::to_string(sp.base_dim()));
  }
  std::vector<std::string> fields = sp.fields();
  if (S.count() == 1) {
    fields.push_back("lambda");
  } else {
    for (int alpha = 0; alpha < S.count(); ++alpha) {
      fields.push_back("lambda" + std::to_string(alpha + 1));
    }
  }
  return make_space(1, std::move(fields), sp.params());
}

}  // namespace

MultiplierSystem nh_system(const ExprPtr& L, const ConstraintSet& S) {
  MultiplierSystem sys;
  sys.extended = extend_with_multipliers(S);
  sys.field_count = S.space()->field_count();
  sys.multiplier_count = S.count();

  const int n = sys.field_count;
  const std::vector<ExprPtr> el = euler_lagrange_rows(L, S.space());
  for (int i = 0; i < n; ++i) {
    ExprPtr row = el[i];
    for (int alpha = 0; alpha < S.count(); ++alpha) {
      const ExprPtr lam = jet(*sys.extended, sys.extended->field_name(n + alpha));
      row = row + lam * diff(S.constraints()[alpha], JetCoord{i, {0}});
    }
    sys.rows.push_back(row);
  }
  for (int alpha = 0; alpha < S.count(); ++alpha) sys.rows.push_back(S.constraints()[alpha]);
  return sys;
}

MultiplierSystem vak_system(const ExprPtr& L, const ConstraintSet& S) {
  MultiplierSystem sys;
  sys.extended = extend_with_multipliers(S);
  sys.field_count = S.space()->field_count();
  sys.multiplier_count = S.count();

  const int n = sys.field_count;
  ExprPtr extended_L = L;
  for (int alpha = 0; alpha < S.count(); ++alpha) {
    const ExprPtr lam = jet(*sys.extended, sys.extended->field_name(n + alpha));
    extended_L = extended_L + lam * S.constraints()[alpha];
  }
  sys.rows = euler_lagrange_rows(extended_L, sys.extended);
  return sys;
}

namespace {

// A derivative that should vanish identically is probed at random points of
// the extended jet space; values are compared against the magnitude of the
// row it came from so scale drops out.
bool identically_zero(const ExprPtr& probe, const ExprPtr& reference, const Space& sp) {
  if (is_zero(probe)) return true;
  Rng rng(0x5eedf00dULL);
  int clean = 0;
  for (int attempt = 0; attempt < 200 && clean < 24; ++attempt) {
    JetPoint p(sp.base_dim(), sp.field_count(), 3);
    p.set_base(0, rng.uniform(-1.5, 1.5));
    for (int f = 0; f < sp.field_count(); ++f) {
      p.set_coord({f, {}}, rng.uniform(-1.5, 1.5));
      p.set_coord({f, {0}}, rng.uniform(-1.5, 1.5));
      p.set_coord({f, {0, 0}}, rng.uniform(-1.5, 1.5));
      p.set_coord({f, {0, 0, 0}}, rng.uniform(-1.5, 1.5));
    }
    std::vector<double> params(sp.param_count());
    for (auto& v : params) v = rng.uniform(0.5, 2.0);
    try {
      const double value = eval(probe, p, params);
      const double scale = std::abs(eval(reference, p, params));
      if (std::abs(value) > 1e-9 * (1.0 + scale)) return false;
      ++clean;
    } catch (const EvalError&) {
      continue;
    }
  }
  if (clean < 24) throw Error("could not probe a row for multiplier structure");
  return true;
}

}  // namespace

EliminationResult eliminate_multiplier(const MultiplierSystem& sys, int chosen_row) {
  if (sys.multiplier_count != 1) {
    throw Error("elimination is implemented for a single multiplier, got " +
                std::to_string(sys.multiplier_count));
  }
  if (chosen_row < 0 || chosen_row >= static_cast<int>(sys.rows.size())) {
    throw Error("chosen row " + std::to_string(chosen_row) + " is out of range");
  }
  const Space& sp = *sys.extended;
  const JetCoord lam{sys.field_count, {}};
  const JetCoord lam_dot{sys.field_count, {0}};

  const ExprPtr& row = sys.rows[chosen_row];
  if (!identically_zero(diff(row, lam_dot), row, sp)) {
    throw Error("the chosen row involves the multiplier's derivative, so it cannot be "
                "solved for the multiplier pointwise");
  }
  const ExprPtr coeff = diff(row, lam);
  if (!identically_zero(diff(coeff, lam), row, sp)) {
    throw Error("the chosen row is not affine in the multiplier");
  }
  if (identically_zero(coeff, row, sp)) {
    throw Error("the chosen row does not involve the multiplier, so it cannot be "
                "solved for it");
  }
  const ExprPtr rest = substitute_coord(row, lam, 0.0);
  const ExprPtr solved = neg(rest) / coeff;
  const ExprPtr solved_dot = formal_derivative(solved, 0);

  EliminationResult out;
  out.multiplier = solved;
  out.coefficient = coeff;
  for (int r = 0; r < static_cast<int>(sys.rows.size()); ++r) {
    if (r == chosen_row) continue;
    const ExprPtr& other = sys.rows[r];
    const ExprPtr c_lam = diff(other, lam);
    const ExprPtr c_dot = diff(other, lam_dot);
    for (const ExprPtr& c : {c_lam, c_dot}) {
      if (!identically_zero(diff(c, lam), other, sp) ||
          !identically_zero(diff(c, lam_dot), other, sp)) {
        throw Error("row " + std::to_string(r) + " is not affine in the multiplier "
                    "and its derivative, so it cannot be reduced");
      }
    }
    const ExprPtr base = substitute_coord(substitute_coord(other, lam, 0.0), lam_dot, 0.0);
    out.kept_rows.push_back(r);
    out.reduced.push_back(base + c_lam * solved + c_dot * solved_dot);
  }
  return out;
}

}  // namespace varicon
