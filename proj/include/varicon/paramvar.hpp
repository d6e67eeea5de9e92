#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "varicon/admissibility.hpp"
#include "varicon/quadrature.hpp"

namespace varicon {

// A family of vertical fields linear in free parameter functions eps^A and
// their first derivatives:
//
//   V^a = value^a_A eps^A + deriv^{a mu}_A d_mu eps^A.
//
// Coefficients live on the system space with jet order at most 1.
class Parametrization {
 public:
  // value: n x k, deriv: n x k x m (fields x slots x base directions).
  Parametrization(SpacePtr space, std::vector<std::vector<ExprPtr>> value,
                  std::vector<std::vector<std::vector<ExprPtr>>> deriv);

  const SpacePtr& space() const noexcept { return space_; }
  int slot_count() const noexcept { return slots_; }
  const std::vector<std::vector<ExprPtr>>& value() const noexcept { return value_; }
  const std::vector<std::vector<std::vector<ExprPtr>>>& deriv() const noexcept { return deriv_; }

 private:
  SpacePtr space_;
  int slots_;
  std::vector<std::vector<ExprPtr>> value_;
  std::vector<std::vector<std::vector<ExprPtr>>> deriv_;
};

// Instantiate the family at concrete parameter functions.  Each eps entry
// must be free of derivative coordinates (order 0); it may depend on base
// and field coordinates.
VerticalField apply_parametrization(const Parametrization& P, const std::vector<ExprPtr>& eps);

struct AdaptednessReport {
  double max_residual = 0.0;
  int choices = 0;  // parameter-function choices probed
};

// Probe whether every field in the family satisfies the pointwise
// (velocity-gradient) admissibility condition at the given jet points.
// Parameter functions probed: each unit constant slot, then random smooth
// scalars.  Points need jet order 1.
AdaptednessReport check_chetaev_adapted(const Parametrization& P, const ConstraintSet& S,
                                        std::span<const JetPoint> points,
                                        std::span<const double> params, int random_trials,
                                        std::uint64_t seed);

// Same probe for the tangency condition.  Points need jet order 2.
AdaptednessReport check_vak_adapted(const Parametrization& P, const ConstraintSet& S,
                                    std::span<const JetPoint> points,
                                    std::span<const double> params, int random_trials,
                                    std::uint64_t seed);

// Euler-Lagrange expression of a first-order Lagrangian, one row per field:
//   row_a = dL/dy^a - d_nu dL/dy^a_nu.   Jet order at most 2.
std::vector<ExprPtr> euler_lagrange_rows(const ExprPtr& L, const SpacePtr& space);

// Split of the first variation against the family: for any parameter
// functions eps,
//
//   dL/dy^a V^a + dL/dy^a_mu d_mu V^a
//     = reduced_A eps^A + d_mu [ flux^mu_A eps^A + flux2^{mu nu}_A d_nu eps^A ].
//
// reduced has jet order at most 3, flux at most 2, flux2 at most 1.
struct ELForm {
  std::vector<ExprPtr> reduced;                         // k
  std::vector<std::vector<ExprPtr>> flux;               // k x m
  std::vector<std::vector<std::vector<ExprPtr>>> flux2;  // k x m x m
};

ELForm assemble_el_form(const ExprPtr& L, const Parametrization& P);

// First variation of the action along sigma for the field generated by eps,
// as a trapezoid pair with extrapolation.  Every eps^A and its first
// derivatives must vanish (<= 1e-12) at all boundary nodes of the fine grid;
// otherwise the boundary terms of the split would contaminate the value and
// the call fails.
RefinedIntegral discrete_first_variation(const ExprPtr& L, const Parametrization& P,
                                         const std::vector<ExprPtr>& eps,
                                         const SectionExpr& sigma,
                                         std::span<const double> lo,
                                         std::span<const double> hi, int cells,
                                         std::span<const double> params, int threads = 0);

// Integral of reduced_A eps^A along sigma, same quadrature as the first
// variation.  For boundary-vanishing eps the two agree up to O(h^2).
RefinedIntegral discrete_source_pairing(const ELForm& form, const std::vector<ExprPtr>& eps,
                                        const SectionExpr& sigma, std::span<const double> lo,
                                        std::span<const double> hi, int cells,
                                        std::span<const double> params, int threads = 0);

}  // namespace varicon
