#pragma once

#include <span>

#include "varicon/expr.hpp"
#include "varicon/section.hpp"

namespace varicon {

// Worker cap for parallel point evaluation: the VARICON_THREADS environment
// variable when set, otherwise the hardware count clamped to 8.  Results are
// bitwise independent of the worker count.
int worker_count();

// Composite tensor-product trapezoid rule for an integrand evaluated on the
// prolongation of sigma over the box [lo, hi].  `cells` subdivisions per
// axis.  Node values are accumulated with pairwise summation in a fixed
// order, so the result does not depend on how the evaluation work is split
// across threads (`threads` <= 0 picks worker_count()).
double integrate_on_section(const ExprPtr& integrand, const SectionExpr& sigma,
                            std::span<const double> lo, std::span<const double> hi,
                            int cells, std::span<const double> params, int threads = 0);

struct RefinedIntegral {
  double coarse = 0.0;  // trapezoid at `cells`
  double fine = 0.0;    // trapezoid at 2*cells
  double value = 0.0;   // Richardson extrapolation of the pair
};

// Trapezoid at two resolutions plus the h^2 extrapolation of the pair.
RefinedIntegral integrate_refined(const ExprPtr& integrand, const SectionExpr& sigma,
                                  std::span<const double> lo, std::span<const double> hi,
                                  int cells, std::span<const double> params,
                                  int threads = 0);

}  // namespace varicon
