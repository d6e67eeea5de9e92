#pragma once

#include <span>
#include <vector>

#include "varicon/expr.hpp"

namespace varicon {

// A section of the configuration bundle given in closed form: one expression
// per field, depending on base coordinates and parameters only.
class SectionExpr {
 public:
  SectionExpr(SpacePtr space, std::vector<ExprPtr> components);

  const SpacePtr& space() const noexcept { return space_; }
  const std::vector<ExprPtr>& components() const noexcept { return components_; }

 private:
  SpacePtr space_;
  std::vector<ExprPtr> components_;
};

// Jet prolongation of a closed-form section: all derivative tables up to
// `order` are produced symbolically once, then evaluated per base point.
class Prolongation {
 public:
  Prolongation(const SectionExpr& sigma, int order, std::span<const double> params);

  int order() const noexcept { return order_; }

  JetPoint at(std::span<const double> base_point) const;

 private:
  SpacePtr space_;
  int order_;
  std::vector<double> params_;
  // derivs_[field] lists (multi-index, expression) pairs for orders 0..order.
  std::vector<std::vector<std::pair<MultiIndex, ExprPtr>>> derivs_;
};

}  // namespace varicon
