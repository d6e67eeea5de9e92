#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "varicon/admissibility.hpp"
#include "varicon/expr.hpp"
#include "varicon/quadrature.hpp"

namespace varicon {

// Relativistic barotropic fluid on a fixed background: a vector density
// J^mu(x) and an internal-energy law e(rho).  Everything is closed-form: the
// metric entries and the components of J are expressions of the base
// coordinates alone, so residuals evaluate to roundoff rather than to grid
// error.  Signature convention (-,+,+,+) with |J| = sqrt(-g_{mu nu} J^mu
// J^nu); a signature toggle is deliberately not offered.

// The configuration space of the fluid: four density components over a
// four-dimensional base.
SpacePtr fluid_space();

// One formal variable "rho" for equation-of-state expressions.
SpacePtr eos_space();

class Metric {
 public:
  // entries: 16 expressions, row-major g[mu*4+nu], depending on base
  // coordinates only.  Symmetry is probed numerically at fixed sample
  // points.
  Metric(SpacePtr space, std::vector<ExprPtr> entries);

  static Metric minkowski(SpacePtr space);

  const SpacePtr& space() const noexcept { return space_; }
  const ExprPtr& entry(int mu, int nu) const;

  // Symbolic Laplace-expansion determinant.
  ExprPtr determinant() const;
  // Symbolic inverse through the adjugate, row-major.
  std::array<ExprPtr, 16> inverse() const;

 private:
  SpacePtr space_;
  std::vector<ExprPtr> g_;
};

struct FluidField {
  // J: 4 components of the vector density; eos: internal energy e(rho) on
  // eos_space().  The pressure is always derived as rho^2 * de/drho.
  FluidField(SpacePtr space, std::vector<ExprPtr> J, ExprPtr eos);

  SpacePtr space;
  std::vector<ExprPtr> J;
  ExprPtr eos;
};

struct FluidPointState {
  double rho = 0.0;
  std::array<double, 4> u_upper{};
  std::array<double, 4> u_lower{};
  double pressure = 0.0;
  double energy_density = 0.0;  // mu = rho * (1 + e(rho))
};

// Density, normalized velocity, pressure and energy density at one point.
// Errors when J is not timelike there or the metric degenerates.
FluidPointState extract_state(const FluidField& f, const Metric& g,
                              std::span<const double> x);

// Plain coordinate divergence d_mu J^mu (J is a density: no connection
// terms), evaluated at the given points.
std::vector<double> continuity_residual(const FluidField& f,
                                        std::span<const std::array<double, 4>> pts);

// The four covector components of the momentum balance,
//
//   R_mu = (u_mu u^nu + delta^nu_mu) D_nu P + (mu + P) u^nu D_nu u_mu,
//
// with D the Levi-Civita covariant derivative of the metric, assembled
// symbolically.
std::vector<ExprPtr> euler_residual_exprs(const FluidField& f, const Metric& g);
std::vector<std::array<double, 4>> euler_residual(const FluidField& f, const Metric& g,
                                                  std::span<const std::array<double, 4>> pts);

// Drag of the density J along the spacetime field X:
//   (Lie_X J)^mu = d_nu J^mu X^nu - J^nu d_nu X^mu + J^mu d_nu X^nu.
std::vector<ExprPtr> lie_drag(const FluidField& f, const std::vector<ExprPtr>& X);

struct ChetaevTrivialityReport {
  int kernel_dimension = -1;        // common dimension across the probe points
  bool variations_trivial = false;  // only the zero variation is admissible
  std::string verdict;
};

// Kernel dimension of the velocity-gradient matrix of the constraint set at
// each probe point.  For the continuity constraint the matrix is the
// identity in disguise, the kernel is zero, and the report carries the
// narrative consequence: every admissible section is critical under the
// pointwise prescription, which makes that prescription vacuous here.
ChetaevTrivialityReport chetaev_triviality(const ConstraintSet& S,
                                           std::span<const JetPoint> pts,
                                           std::span<const double> params = {});

// Quadrature of the first-variation integrand
//   -sqrt(|det g|) * (d mu/d rho) * (J_mu / rho) * (Lie_X J)^mu
// over the box [lo, hi], with Richardson refinement.  X and its first
// derivatives must vanish on the boundary of the box (checked on the fine
// grid).
RefinedIntegral fluid_first_variation(const FluidField& f, const Metric& g,
                                      const std::vector<ExprPtr>& X,
                                      std::span<const double> lo, std::span<const double> hi,
                                      int cells_per_axis, int threads = 0);

}  // namespace varicon
