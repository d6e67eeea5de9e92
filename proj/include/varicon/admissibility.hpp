#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "varicon/expr.hpp"
#include "varicon/section.hpp"

namespace varicon {

// A set of velocity-level constraint functions on the first jet: each entry
// has jet order at most 1 and cuts out the admissible submanifold jointly
// with the others.
class ConstraintSet {
 public:
  ConstraintSet(SpacePtr space, std::vector<ExprPtr> constraints);

  const SpacePtr& space() const noexcept { return space_; }
  const std::vector<ExprPtr>& constraints() const noexcept { return constraints_; }
  int count() const noexcept { return static_cast<int>(constraints_.size()); }

 private:
  SpacePtr space_;
  std::vector<ExprPtr> constraints_;
};

// A vertical vector field along sections: one component per field, each of
// jet order at most 1.
class VerticalField {
 public:
  VerticalField(SpacePtr space, std::vector<ExprPtr> components);

  const SpacePtr& space() const noexcept { return space_; }
  const std::vector<ExprPtr>& components() const noexcept { return components_; }

 private:
  SpacePtr space_;
  std::vector<ExprPtr> components_;
};

struct AdmissibilityRecord {
  std::vector<double> point;
  int alpha = 0;
  double residual = 0.0;
};

struct AdmissibilityReport {
  std::vector<AdmissibilityRecord> records;
  double max_abs_residual = 0.0;
};

// Evaluate every constraint on the first prolongation of sigma at the given
// base points.
AdmissibilityReport admissibility_residual(const ConstraintSet& set,
                                           const SectionExpr& sigma,
                                           std::span<const std::vector<double>> points,
                                           std::span<const double> params);

// Velocity-gradient matrix of the constraints at one jet point.  Row alpha,
// column i*m + mu holds the partial of constraint alpha in the coordinate
// carrying the mu-derivative of field i.
Eigen::MatrixXd chetaev_matrix(const ConstraintSet& set, const JetPoint& p,
                               std::span<const double> params);

struct ChetaevKernel {
  int rank = 0;
  // Orthonormal basis of the admissible-direction kernel, one column per
  // kernel dimension.  rank + cols == field count.
  Eigen::MatrixXd basis;
};

// Kernel of the stacked (r*m) x n matrix: the contraction acts on the field
// index only, so each derivative direction contributes its own row block.
ChetaevKernel chetaev_kernel(const ConstraintSet& set, const JetPoint& p,
                             std::span<const double> params);

// Residual of the vakonomic tangency condition for V along sigma: the value
// part plus the chain-rule part with total derivatives of V.  One row per
// constraint per point.
std::vector<std::vector<double>> vak_tangency_residual(const ConstraintSet& set,
                                                       const VerticalField& V,
                                                       const SectionExpr& sigma,
                                                       std::span<const std::vector<double>> points,
                                                       std::span<const double> params);

// Tangency residual expressions (one per constraint), for callers that
// evaluate at their own jet points.
std::vector<ExprPtr> vak_tangency_exprs(const ConstraintSet& set, const VerticalField& V);

struct EquivalenceTrial {
  double vak_residual = 0.0;       // sup of the tangency residual along sigma
  double chetaev_quantity = 0.0;   // sup of the pointwise contraction along sigma
  double boundary_norm = 0.0;      // |V| at the endpoints
  bool boundary_vanishing = false;
};

struct EquivalenceReport {
  std::vector<EquivalenceTrial> tangential;  // built Chetaev-admissible
  std::vector<EquivalenceTrial> vak_built;   // built vak-admissible
  double max_tangential_vak_residual = 0.0;
  double max_boundary_chetaev_quantity = 0.0;  // over boundary-vanishing vak trials
  int boundary_vanishing_count = 0;
};

// Probes the equivalence of the two admissibility notions for the
// integrable family phi_mu = d_mu f with f of order 0:
//  (a) fields built pointwise-tangential to grad f satisfy the vakonomic
//      condition along sigma;
//  (b) on an interval (one base dimension), vakonomic-admissible fields keep
//      the contraction with grad f constant, so boundary-vanishing ones are
//      pointwise-tangential everywhere.
// Trials with a nonzero constant are kept in the report as the boundary
// violating branch.
EquivalenceReport linear_integrable_equivalence_check(const ExprPtr& f,
                                                      const SectionExpr& sigma,
                                                      int trials, double a, double b,
                                                      int grid_points,
                                                      std::span<const double> params,
                                                      std::uint64_t seed);

}  // namespace varicon
