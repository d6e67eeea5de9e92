#include "varicon/section.hpp"

namespace varicon {

SectionExpr::SectionExpr(SpacePtr space, std::vector<ExprPtr> components)
    : space_(std::move(space)), components_(std::move(components)) {
  if (!space_) throw SchemaError("section needs a space");
  if (static_cast<int>(components_.size()) != space_->field_count())
    throw SchemaError("section must provide one component per field");
  for (const auto& c : components_)
    if (!jet_coords(c).empty())
      throw SchemaError("section components may depend on base coordinates and parameters only");
}

Prolongation::Prolongation(const SectionExpr& sigma, int order,
                           std::span<const double> params)
    : space_(sigma.space()), order_(order), params_(params.begin(), params.end()) {
  if (order < 0 || order > kMaxJetOrder) throw OrderError("prolongation order must lie in [0, 3]");
  const int m = space_->base_dim();
  derivs_.resize(static_cast<std::size_t>(space_->field_count()));

  for (int f = 0; f < space_->field_count(); ++f) {
    auto& table = derivs_[static_cast<std::size_t>(f)];
    table.emplace_back(MultiIndex{}, sigma.components()[static_cast<std::size_t>(f)]);
    // Each order-k entry extends an order-(k-1) entry by one index; only the
    // sorted extension mu >= last index is kept, so every symmetric slot is
    // produced exactly once.
    std::size_t level_begin = 0;
    for (int k = 1; k <= order; ++k) {
      const std::size_t level_end = table.size();
      for (std::size_t s = level_begin; s < level_end; ++s) {
        const int last = table[s].first.order() == 0 ? 0 : table[s].first[table[s].first.order() - 1];
        for (int mu = last; mu < m; ++mu) {
          // formal_derivative reduces to the plain base partial here, since
          // section components carry no jet coordinates.
          table.emplace_back(MultiIndex::raised(table[s].first, mu),
                             formal_derivative(table[s].second, mu));
        }
      }
      level_begin = level_end;
    }
  }
}

JetPoint Prolongation::at(std::span<const double> base_point) const {
  const int m = space_->base_dim();
  if (static_cast<int>(base_point.size()) != m)
    throw SchemaError("base point dimension mismatch");
  JetPoint p(m, space_->field_count(), order_);
  for (int mu = 0; mu < m; ++mu) p.set_base(mu, base_point[static_cast<std::size_t>(mu)]);
  for (int f = 0; f < space_->field_count(); ++f)
    for (const auto& [mi, e] : derivs_[static_cast<std::size_t>(f)])
      p.set_coord(JetCoord{f, mi}, eval(e, p, params_));
  return p;
}

}  // namespace varicon
