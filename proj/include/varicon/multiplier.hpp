#pragma once

#include <vector>

#include "varicon/admissibility.hpp"
#include "varicon/expr.hpp"

namespace varicon {

// A constrained system written with multiplier fields appended to the
// original space.  Rows 0..n-1 are the field equations, rows n..n+r-1 the
// constraints.  All rows are understood as "= 0".
struct MultiplierSystem {
  SpacePtr extended;
  std::vector<ExprPtr> rows;
  int field_count = 0;       // fields of the original space
  int multiplier_count = 0;  // appended multiplier fields
};

// Field equations with the multipliers coupled through the velocity
// gradient of the constraints:
//
//   row_i = dL/dy^i - d_t dL/dy^i_t + lambda_alpha dPhi^alpha/dy^i_t.
//
// One base dimension only.  The multiplier fields are named "lambda" (single
// constraint) or "lambda1", "lambda2", ... otherwise.
MultiplierSystem nh_system(const ExprPtr& L, const ConstraintSet& S);

// Euler-Lagrange rows of the extended Lagrangian L + lambda_alpha Phi^alpha
// on the extended space.  The multiplier rows reproduce the constraints
// verbatim.  One base dimension only.
MultiplierSystem vak_system(const ExprPtr& L, const ConstraintSet& S);

struct EliminationResult {
  // The multiplier solved from the chosen row, as an expression in the
  // remaining coordinates.
  ExprPtr multiplier;
  // Coefficient of the multiplier in the chosen row: the elimination is
  // valid wherever it stays away from zero.
  ExprPtr coefficient;
  // Indices of the other rows, with the multiplier and its derivative
  // substituted away.
  std::vector<int> kept_rows;
  std::vector<ExprPtr> reduced;
};

// Solves the chosen row for the single multiplier and substitutes the
// solution (and its total derivative) into the remaining rows.  The chosen
// row must be affine in the multiplier with a nonvanishing coefficient and
// must not involve the multiplier's derivative; every other row must be
// affine in the multiplier and its derivative jointly.
EliminationResult eliminate_multiplier(const MultiplierSystem& sys, int chosen_row);

}  // namespace varicon
