#include "varicon/paramvar.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "varicon/errors.hpp"
#include "varicon/rng.hpp"

namespace varicon {

namespace {

void require_coefficient(const ExprPtr& e, const char* which) {
  if (!e) throw Error(std::string("parametrization ") + which + " coefficient is null");
  if (e->jet_order() > 1) {
    throw OrderError(std::string("parametrization ") + which +
                     " coefficient has jet order " + std::to_string(e->jet_order()) +
                     " but at most 1 is allowed");
  }
}

}  // namespace

Parametrization::Parametrization(SpacePtr space, std::vector<std::vector<ExprPtr>> value,
                                 std::vector<std::vector<std::vector<ExprPtr>>> deriv)
    : space_(std::move(space)), value_(std::move(value)), deriv_(std::move(deriv)) {
  const int n = space_->field_count();
  const int m = space_->base_dim();
  if (static_cast<int>(value_.size()) != n || static_cast<int>(deriv_.size()) != n) {
    throw Error("parametrization needs one coefficient row per field");
  }
  if (value_.empty() || value_[0].empty()) {
    throw Error("parametrization needs at least one parameter slot");
  }
  slots_ = static_cast<int>(value_[0].size());
  for (int a = 0; a < n; ++a) {
    if (static_cast<int>(value_[a].size()) != slots_ ||
        static_cast<int>(deriv_[a].size()) != slots_) {
      throw Error("parametrization rows must all have the same slot count");
    }
    for (int A = 0; A < slots_; ++A) {
      require_coefficient(value_[a][A], "value");
      if (static_cast<int>(deriv_[a][A].size()) != m) {
        throw Error("parametrization derivative coefficients need one entry per base direction");
      }
      for (int mu = 0; mu < m; ++mu) require_coefficient(deriv_[a][A][mu], "derivative");
    }
  }
}

VerticalField apply_parametrization(const Parametrization& P, const std::vector<ExprPtr>& eps) {
  const int k = P.slot_count();
  if (static_cast<int>(eps.size()) != k) {
    throw Error("expected " + std::to_string(k) + " parameter functions, got " +
                std::to_string(eps.size()));
  }
  for (int A = 0; A < k; ++A) {
    if (!eps[A]) throw Error("parameter function " + std::to_string(A) + " is null");
    if (eps[A]->jet_order() > 0) {
      throw OrderError("parameter function " + std::to_string(A) +
                       " must not depend on derivative coordinates");
    }
  }
  const Space& sp = *P.space();
  const int n = sp.field_count();
  const int m = sp.base_dim();
  std::vector<ExprPtr> comps(n);
  for (int a = 0; a < n; ++a) {
    ExprPtr c = lit(0.0);
    for (int A = 0; A < k; ++A) {
      c = c + P.value()[a][A] * eps[A];
      for (int mu = 0; mu < m; ++mu) {
        c = c + P.deriv()[a][A][mu] * formal_derivative(eps[A], mu);
      }
    }
    comps[a] = c;
  }
  return VerticalField(P.space(), std::move(comps));
}

namespace {

// Smooth order-0 scalar mixing base and field dependence, for probing a
// family at generic parameter functions.
ExprPtr random_scalar_field(const Space& sp, Rng& rng) {
  const int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(sp.field_count())));
  const int mu = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(sp.base_dim())));
  const double c0 = rng.uniform(-1.0, 1.0);
  const double c1 = rng.uniform(-1.0, 1.0);
  const double c2 = rng.uniform(-1.0, 1.0);
  const double freq = rng.uniform(0.3, 1.5);
  return lit(c0) + lit(c1) * cos(lit(freq) * base_coord(mu)) +
         lit(c2) * sin(jet(sp, sp.field_name(k)));
}

std::vector<std::vector<ExprPtr>> probe_choices(const Parametrization& P, int random_trials,
                                                std::uint64_t seed) {
  const Space& sp = *P.space();
  const int k = P.slot_count();
  std::vector<std::vector<ExprPtr>> choices;
  for (int A = 0; A < k; ++A) {
    std::vector<ExprPtr> eps(k, lit(0.0));
    eps[A] = lit(1.0);
    choices.push_back(std::move(eps));
  }
  Rng rng(seed);
  for (int t = 0; t < random_trials; ++t) {
    std::vector<ExprPtr> eps(k);
    for (int A = 0; A < k; ++A) eps[A] = random_scalar_field(sp, rng);
    choices.push_back(std::move(eps));
  }
  return choices;
}

template <typename RowBuilder>
AdaptednessReport run_adaptedness(const Parametrization& P, int random_trials,
                                  std::uint64_t seed, std::span<const JetPoint> points,
                                  std::span<const double> params, RowBuilder&& rows_for) {
  AdaptednessReport report;
  for (auto& eps : probe_choices(P, random_trials, seed)) {
    const VerticalField V = apply_parametrization(P, eps);
    for (const ExprPtr& row : rows_for(V)) {
      for (const JetPoint& p : points) {
        report.max_residual = std::max(report.max_residual, std::abs(eval(row, p, params)));
      }
    }
    ++report.choices;
  }
  return report;
}

}  // namespace

AdaptednessReport check_chetaev_adapted(const Parametrization& P, const ConstraintSet& S,
                                        std::span<const JetPoint> points,
                                        std::span<const double> params, int random_trials,
                                        std::uint64_t seed) {
  const Space& sp = *S.space();
  const int n = sp.field_count();
  const int m = sp.base_dim();
  return run_adaptedness(P, random_trials, seed, points, params, [&](const VerticalField& V) {
    std::vector<ExprPtr> rows;
    for (int alpha = 0; alpha < S.count(); ++alpha) {
      for (int mu = 0; mu < m; ++mu) {
        ExprPtr row = lit(0.0);
        for (int i = 0; i < n; ++i) {
          row = row + diff(S.constraints()[alpha], JetCoord{i, MultiIndex{mu}}) *
                          V.components()[i];
        }
        rows.push_back(row);
      }
    }
    return rows;
  });
}

AdaptednessReport check_vak_adapted(const Parametrization& P, const ConstraintSet& S,
                                    std::span<const JetPoint> points,
                                    std::span<const double> params, int random_trials,
                                    std::uint64_t seed) {
  return run_adaptedness(P, random_trials, seed, points, params,
                         [&](const VerticalField& V) { return vak_tangency_exprs(S, V); });
}

std::vector<ExprPtr> euler_lagrange_rows(const ExprPtr& L, const SpacePtr& space) {
  if (!L) throw Error("null Lagrangian");
  if (L->jet_order() > 1) {
    throw OrderError("the Lagrangian must be first order, got jet order " +
                     std::to_string(L->jet_order()));
  }
  const int n = space->field_count();
  const int m = space->base_dim();
  std::vector<ExprPtr> rows(n);
  for (int a = 0; a < n; ++a) {
    ExprPtr row = diff(L, JetCoord{a, {}});
    for (int nu = 0; nu < m; ++nu) {
      row = row - formal_derivative(diff(L, JetCoord{a, MultiIndex{nu}}), nu);
    }
    rows[a] = row;
  }
  return rows;
}

ELForm assemble_el_form(const ExprPtr& L, const Parametrization& P) {
  const Space& sp = *P.space();
  const int n = sp.field_count();
  const int m = sp.base_dim();
  const int k = P.slot_count();
  const std::vector<ExprPtr> el = euler_lagrange_rows(L, P.space());

  ELForm form;
  form.reduced.resize(k);
  form.flux.assign(k, std::vector<ExprPtr>(m));
  form.flux2.assign(k, std::vector<std::vector<ExprPtr>>(m, std::vector<ExprPtr>(m)));

  for (int A = 0; A < k; ++A) {
    ExprPtr reduced = lit(0.0);
    for (int a = 0; a < n; ++a) reduced = reduced + el[a] * P.value()[a][A];
    for (int mu = 0; mu < m; ++mu) {
      ExprPtr carried = lit(0.0);
      for (int a = 0; a < n; ++a) carried = carried + el[a] * P.deriv()[a][A][mu];
      reduced = reduced - formal_derivative(carried, mu);

      ExprPtr flux = carried;
      for (int a = 0; a < n; ++a) {
        flux = flux + diff(L, JetCoord{a, MultiIndex{mu}}) * P.value()[a][A];
      }
      form.flux[A][mu] = flux;

      for (int nu = 0; nu < m; ++nu) {
        ExprPtr flux2 = lit(0.0);
        for (int a = 0; a < n; ++a) {
          flux2 = flux2 + diff(L, JetCoord{a, MultiIndex{mu}}) * P.deriv()[a][A][nu];
        }
        form.flux2[A][mu][nu] = flux2;
      }
    }
    form.reduced[A] = reduced;

    if (form.reduced[A]->jet_order() > 3) throw Error("reduced row exceeds jet order 3");
    for (int mu = 0; mu < m; ++mu) {
      if (form.flux[A][mu]->jet_order() > 2) throw Error("flux row exceeds jet order 2");
      for (int nu = 0; nu < m; ++nu) {
        if (form.flux2[A][mu][nu]->jet_order() > 1) throw Error("flux2 row exceeds jet order 1");
      }
    }
  }
  return form;
}

namespace {

// Gateaux derivative of L along the vertical field V.
ExprPtr first_variation_integrand(const ExprPtr& L, const VerticalField& V) {
  const Space& sp = *V.space();
  ExprPtr out = lit(0.0);
  for (int a = 0; a < sp.field_count(); ++a) {
    out = out + diff(L, JetCoord{a, {}}) * V.components()[a];
    for (int mu = 0; mu < sp.base_dim(); ++mu) {
      out = out + diff(L, JetCoord{a, MultiIndex{mu}}) *
                      formal_derivative(V.components()[a], mu);
    }
  }
  return out;
}

void require_boundary_vanishing(const std::vector<ExprPtr>& eps, const SectionExpr& sigma,
                                std::span<const double> lo, std::span<const double> hi,
                                int fine_cells, std::span<const double> params) {
  const int m = sigma.space()->base_dim();
  std::vector<ExprPtr> probes;
  for (const ExprPtr& e : eps) {
    probes.push_back(e);
    for (int mu = 0; mu < m; ++mu) probes.push_back(formal_derivative(e, mu));
  }
  const Prolongation j1(sigma, 1, params);

  const std::size_t nodes = static_cast<std::size_t>(fine_cells) + 1;
  std::size_t total = 1;
  for (int mu = 0; mu < m; ++mu) total *= nodes;
  std::vector<double> pt(m);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    bool boundary = false;
    for (int mu = 0; mu < m; ++mu) {
      const std::size_t node = rem % nodes;
      rem /= nodes;
      if (node == 0 || node == nodes - 1) boundary = true;
      pt[mu] = node == nodes - 1 ? hi[mu] : lo[mu] + (hi[mu] - lo[mu]) / fine_cells * node;
    }
    if (!boundary) continue;
    const JetPoint p = j1.at(pt);
    for (const ExprPtr& probe : probes) {
      if (std::abs(eval(probe, p, params)) > 1e-12) {
        throw Error("parameter functions must vanish along the integration boundary "
                    "together with their first derivatives");
      }
    }
  }
}

}  // namespace

RefinedIntegral discrete_first_variation(const ExprPtr& L, const Parametrization& P,
                                         const std::vector<ExprPtr>& eps,
                                         const SectionExpr& sigma,
                                         std::span<const double> lo,
                                         std::span<const double> hi, int cells,
                                         std::span<const double> params, int threads) {
  const VerticalField V = apply_parametrization(P, eps);
  require_boundary_vanishing(eps, sigma, lo, hi, 2 * cells, params);
  const ExprPtr integrand = first_variation_integrand(L, V);
  return integrate_refined(integrand, sigma, lo, hi, cells, params, threads);
}

RefinedIntegral discrete_source_pairing(const ELForm& form, const std::vector<ExprPtr>& eps,
                                        const SectionExpr& sigma, std::span<const double> lo,
                                        std::span<const double> hi, int cells,
                                        std::span<const double> params, int threads) {
  if (eps.size() != form.reduced.size()) {
    throw Error("parameter-function count does not match the form's slot count");
  }
  ExprPtr integrand = lit(0.0);
  for (std::size_t A = 0; A < eps.size(); ++A) {
    integrand = integrand + form.reduced[A] * eps[A];
  }
  return integrate_refined(integrand, sigma, lo, hi, cells, params, threads);
}

}  // namespace varicon
