#include "varicon/admissibility.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>
#include <utility>

#include "varicon/errors.hpp"
#include "varicon/rng.hpp"

namespace varicon {

namespace {

void require_order_at_most_1(const std::vector<ExprPtr>& exprs, const char* what) {
  for (std::size_t k = 0; k < exprs.size(); ++k) {
    if (!exprs[k]) throw Error(std::string(what) + " entry " + std::to_string(k) + " is null");
    if (exprs[k]->jet_order() > 1) {
      throw OrderError(std::string(what) + " entry " + std::to_string(k) +
                       " has jet order " + std::to_string(exprs[k]->jet_order()) +
                       " but at most 1 is allowed");
    }
  }
}

}  // namespace

ConstraintSet::ConstraintSet(SpacePtr space, std::vector<ExprPtr> constraints)
    : space_(std::move(space)), constraints_(std::move(constraints)) {
  if (constraints_.empty()) throw Error("constraint set must contain at least one constraint");
  require_order_at_most_1(constraints_, "constraint");
}

VerticalField::VerticalField(SpacePtr space, std::vector<ExprPtr> components)
    : space_(std::move(space)), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != space_->field_count()) {
    throw Error("vertical field needs one component per field: got " +
                std::to_string(components_.size()) + " for " +
                std::to_string(space_->field_count()) + " fields");
  }
  require_order_at_most_1(components_, "vertical field component");
}

AdmissibilityReport admissibility_residual(const ConstraintSet& set,
                                           const SectionExpr& sigma,
                                           std::span<const std::vector<double>> points,
                                           std::span<const double> params) {
  Prolongation j1(sigma, 1, params);
  AdmissibilityReport report;
  for (const auto& pt : points) {
    const JetPoint p = j1.at(pt);
    for (int alpha = 0; alpha < set.count(); ++alpha) {
      const double value = eval(set.constraints()[alpha], p, params);
      report.records.push_back({pt, alpha, value});
      report.max_abs_residual = std::max(report.max_abs_residual, std::abs(value));
    }
  }
  return report;
}

Eigen::MatrixXd chetaev_matrix(const ConstraintSet& set, const JetPoint& p,
                               std::span<const double> params) {
  const Space& sp = *set.space();
  const int n = sp.field_count();
  const int m = sp.base_dim();
  Eigen::MatrixXd A(set.count(), n * m);
  for (int alpha = 0; alpha < set.count(); ++alpha) {
    for (int i = 0; i < n; ++i) {
      for (int mu = 0; mu < m; ++mu) {
        const ExprPtr partial =
            diff(set.constraints()[alpha], JetCoord{i, MultiIndex{static_cast<int>(mu)}});
        A(alpha, i * m + mu) = eval(partial, p, params);
      }
    }
  }
  return A;
}

ChetaevKernel chetaev_kernel(const ConstraintSet& set, const JetPoint& p,
                             std::span<const double> params) {
  const Space& sp = *set.space();
  const int n = sp.field_count();
  const int m = sp.base_dim();
  const int r = set.count();
  const Eigen::MatrixXd A = chetaev_matrix(set, p, params);

  // Stack: the contraction with a vertical field acts on the field index for
  // every derivative direction separately, so row (alpha, mu), column i.
  Eigen::MatrixXd stacked(r * m, n);
  for (int alpha = 0; alpha < r; ++alpha)
    for (int mu = 0; mu < m; ++mu)
      for (int i = 0; i < n; ++i) stacked(alpha * m + mu, i) = A(alpha, i * m + mu);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double threshold = 1e-10 * sigma_max;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > threshold && sv(k) > 0.0) ++rank;

  ChetaevKernel result;
  result.rank = rank;
  result.basis = svd.matrixV().rightCols(n - rank);
  return result;
}

std::vector<ExprPtr> vak_tangency_exprs(const ConstraintSet& set, const VerticalField& V) {
  const Space& sp = *set.space();
  const int n = sp.field_count();
  const int m = sp.base_dim();
  std::vector<ExprPtr> rows;
  rows.reserve(set.count());
  for (int alpha = 0; alpha < set.count(); ++alpha) {
    const ExprPtr& phi = set.constraints()[alpha];
    ExprPtr row = lit(0.0);
    for (int i = 0; i < n; ++i) {
      row = row + diff(phi, JetCoord{i, {}}) * V.components()[i];
      for (int mu = 0; mu < m; ++mu) {
        row = row + diff(phi, JetCoord{i, MultiIndex{mu}}) *
                        formal_derivative(V.components()[i], mu);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::vector<double>> vak_tangency_residual(const ConstraintSet& set,
                                                       const VerticalField& V,
                                                       const SectionExpr& sigma,
                                                       std::span<const std::vector<double>> points,
                                                       std::span<const double> params) {
  const std::vector<ExprPtr> rows = vak_tangency_exprs(set, V);
  Prolongation j2(sigma, 2, params);
  std::vector<std::vector<double>> out;
  out.reserve(points.size());
  for (const auto& pt : points) {
    const JetPoint p = j2.at(pt);
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& row : rows) values.push_back(eval(row, p, params));
    out.push_back(std::move(values));
  }
  return out;
}

namespace {

// Smooth, generically nonconstant component used to build random fields:
// c0 + c1*y^k + c2*sin(c3*x^mu).
ExprPtr random_component(const Space& sp, Rng& rng) {
  const auto coeff = [&rng] { return rng.uniform(-1.0, 1.0); };
  const int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(sp.field_count())));
  const int mu = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(sp.base_dim())));
  const double c0 = coeff();
  const double c1 = coeff();
  const double c2 = coeff();
  const double freq = rng.uniform(0.3, 1.5);
  return lit(c0) + lit(c1) * jet(sp, sp.field_name(k)) +
         lit(c2) * sin(lit(freq) * base_coord(mu));
}

}  // namespace

EquivalenceReport linear_integrable_equivalence_check(const ExprPtr& f,
                                                      const SectionExpr& sigma,
                                                      int trials, double a, double b,
                                                      int grid_points,
                                                      std::span<const double> params,
                                                      std::uint64_t seed) {
  if (!f || f->jet_order() > 0) {
    throw Error("the integrable-family potential must not depend on derivative coordinates");
  }
  if (trials < 1) throw Error("equivalence check needs at least one trial");
  if (grid_points < 2) throw Error("equivalence check needs at least two grid points");
  SpacePtr space = sigma.space();
  const Space& sp = *space;
  const int n = sp.field_count();
  const int m = sp.base_dim();

  // Constraints of the integrable family and the potential's field gradient.
  std::vector<ExprPtr> phis;
  for (int mu = 0; mu < m; ++mu) phis.push_back(formal_derivative(f, mu));
  const ConstraintSet set(space, phis);

  std::vector<ExprPtr> grad(n);
  ExprPtr grad_sq = lit(0.0);
  for (int i = 0; i < n; ++i) {
    grad[i] = diff(f, JetCoord{i, {}});
    grad_sq = grad_sq + grad[i] * grad[i];
  }

  std::vector<std::vector<double>> pts;
  Rng rng(seed);
  if (m == 1) {
    for (int k = 0; k < grid_points; ++k)
      pts.push_back({a + (b - a) * k / (grid_points - 1)});
  } else {
    for (int k = 0; k < grid_points; ++k) {
      std::vector<double> pt(m);
      for (int mu = 0; mu < m; ++mu) pt[mu] = rng.uniform(a, b);
      pts.push_back(std::move(pt));
    }
  }

  Prolongation j2(sigma, 2, params);
  std::vector<JetPoint> jets;
  jets.reserve(pts.size());
  for (const auto& pt : pts) jets.push_back(j2.at(pt));

  for (const auto& p : jets) {
    if (std::abs(eval(grad_sq, p, params)) < 1e-8) {
      throw Error("the potential's field gradient vanishes along the section, so the "
                  "tangential projection is undefined");
    }
  }

  const auto sup_along = [&](const ExprPtr& e) {
    double sup = 0.0;
    for (const auto& p : jets) sup = std::max(sup, std::abs(eval(e, p, params)));
    return sup;
  };

  const auto make_trial = [&](const std::vector<ExprPtr>& comps) {
    const VerticalField V(space, comps);
    const std::vector<ExprPtr> rows = vak_tangency_exprs(set, V);
    ExprPtr contraction = lit(0.0);
    for (int i = 0; i < n; ++i) contraction = contraction + grad[i] * comps[i];

    EquivalenceTrial trial;
    for (const auto& row : rows) trial.vak_residual = std::max(trial.vak_residual, sup_along(row));
    trial.chetaev_quantity = sup_along(contraction);
    return trial;
  };

  EquivalenceReport report;

  // (a) Pointwise-tangential fields: project a random field off grad f.
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<ExprPtr> A(n);
    for (int i = 0; i < n; ++i) A[i] = random_component(sp, rng);
    ExprPtr gA = lit(0.0);
    for (int i = 0; i < n; ++i) gA = gA + grad[i] * A[i];
    std::vector<ExprPtr> comps(n);
    for (int i = 0; i < n; ++i) comps[i] = A[i] - grad[i] * gA / grad_sq;

    EquivalenceTrial t = make_trial(comps);
    report.tangential.push_back(t);
    report.max_tangential_vak_residual =
        std::max(report.max_tangential_vak_residual, t.vak_residual);
  }

  // (b) One base dimension: along the interval [a, b] the tangency condition
  // forces the contraction with grad f to stay constant, so it is pinned by
  // its boundary value.  A window factor vanishing at both endpoints plus an
  // optional constant multiple of the normalized gradient realizes both the
  // boundary-vanishing and the boundary-violating branch.
  if (m == 1) {
    const ExprPtr t_coord = base_coord(0);
    const ExprPtr window = (t_coord - lit(a)) * (lit(b) - t_coord);
    for (int trial = 0; trial < trials; ++trial) {
      std::vector<ExprPtr> A(n);
      for (int i = 0; i < n; ++i) A[i] = random_component(sp, rng);
      ExprPtr gA = lit(0.0);
      for (int i = 0; i < n; ++i) gA = gA + grad[i] * A[i];

      const bool vanishing = trial % 2 == 0;
      const double c0 =
          vanishing ? 0.0 : (rng.next_u64() % 2 ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
      std::vector<ExprPtr> comps(n);
      for (int i = 0; i < n; ++i) {
        comps[i] = window * (A[i] - grad[i] * gA / grad_sq) + lit(c0) * grad[i] / grad_sq;
      }

      EquivalenceTrial t = make_trial(comps);
      t.boundary_vanishing = vanishing;
      double bnorm = 0.0;
      for (const double endpoint : {a, b}) {
        const std::vector<double> ep{endpoint};
        const JetPoint p = j2.at(ep);
        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
          const double v = eval(comps[i], p, params);
          sq += v * v;
        }
        bnorm = std::max(bnorm, std::sqrt(sq));
      }
      t.boundary_norm = bnorm;
      report.vak_built.push_back(t);
      if (vanishing) {
        ++report.boundary_vanishing_count;
        report.max_boundary_chetaev_quantity =
            std::max(report.max_boundary_chetaev_quantity, t.chetaev_quantity);
      }
    }
  }

  return report;
}

}  // namespace varicon
