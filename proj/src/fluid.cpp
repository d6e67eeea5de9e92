#include "varicon/fluid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "varicon/errors.hpp"
#include "varicon/rng.hpp"

namespace varicon {

namespace {

constexpr int kDim = 4;
constexpr double kDegenerateDet = 1e-12;
constexpr double kBoundaryTol = 1e-12;

void require_base_only(const ExprPtr& e, const char* what) {
  if (!e) throw Error(std::string(what) + " is null");
  if (!jet_coords(e).empty())
    throw Error(std::string(what) + " must depend on base coordinates only");
}

JetPoint spacetime_point(std::span<const double> x) {
  if (static_cast<int>(x.size()) != kDim)
    throw Error("spacetime point must have four coordinates");
  JetPoint p(kDim, kDim, 1);
  for (int mu = 0; mu < kDim; ++mu) p.set_base(mu, x[static_cast<std::size_t>(mu)]);
  return p;
}

const ExprPtr& entry_at(const std::vector<ExprPtr>& g, int mu, int nu) {
  return g[static_cast<std::size_t>(mu * kDim + nu)];
}

// Determinant of the 3x3 minor picked out by the surviving rows r and
// columns c of the row-major 4x4 table.
ExprPtr det3(const std::vector<ExprPtr>& g, const std::array<int, 3>& r,
             const std::array<int, 3>& c) {
  auto a = [&](int i, int j) { return entry_at(g, r[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(j)]); };
  ExprPtr m0 = sub(mul(a(1, 1), a(2, 2)), mul(a(1, 2), a(2, 1)));
  ExprPtr m1 = sub(mul(a(1, 0), a(2, 2)), mul(a(1, 2), a(2, 0)));
  ExprPtr m2 = sub(mul(a(1, 0), a(2, 1)), mul(a(1, 1), a(2, 0)));
  return add(sub(mul(a(0, 0), m0), mul(a(0, 1), m1)), mul(a(0, 2), m2));
}

std::array<int, 3> drop(int k) {
  std::array<int, 3> out{};
  int w = 0;
  for (int i = 0; i < kDim; ++i)
    if (i != k) out[static_cast<std::size_t>(w++)] = i;
  return out;
}

// -g_{mu nu} J^mu J^nu as one shared subtree.
ExprPtr norm_square(const Metric& g, const std::vector<ExprPtr>& J) {
  ExprPtr s = lit(0.0);
  for (int mu = 0; mu < kDim; ++mu)
    for (int nu = 0; nu < kDim; ++nu)
      s = add(std::move(s), mul(g.entry(mu, nu), mul(J[static_cast<std::size_t>(mu)], J[static_cast<std::size_t>(nu)])));
  return neg(std::move(s));
}

ExprPtr lower_index(const Metric& g, const std::vector<ExprPtr>& v, int mu) {
  ExprPtr s = lit(0.0);
  for (int nu = 0; nu < kDim; ++nu)
    s = add(std::move(s), mul(g.entry(mu, nu), v[static_cast<std::size_t>(nu)]));
  return s;
}

}  // namespace

SpacePtr fluid_space() {
  static const SpacePtr s = make_space(kDim, {"J0", "J1", "J2", "J3"}, {});
  return s;
}

SpacePtr eos_space() {
  static const SpacePtr s = make_space(1, {"rho"}, {});
  return s;
}

Metric::Metric(SpacePtr space, std::vector<ExprPtr> entries)
    : space_(std::move(space)), g_(std::move(entries)) {
  if (!space_) throw Error("metric needs a space");
  if (space_->base_dim() != kDim)
    throw Error("metric lives over a four-dimensional base");
  if (g_.size() != kDim * kDim)
    throw Error("metric needs 16 entries in row-major order");
  for (const auto& e : g_) require_base_only(e, "metric entry");
  // Symmetry is probed at fixed pseudo-random points rather than by tree
  // comparison, so algebraically equal entry pairs written in different
  // forms still pass.
  Rng rng(0x6d65747269636bull);
  for (int trial = 0; trial < 8; ++trial) {
    std::array<double, 4> x{};
    for (auto& v : x) v = rng.uniform(-0.9, 0.9);
    JetPoint p = spacetime_point(x);
    for (int mu = 0; mu < kDim; ++mu)
      for (int nu = mu + 1; nu < kDim; ++nu) {
        double a = eval(entry(mu, nu), p);
        double b = eval(entry(nu, mu), p);
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        if (std::abs(a - b) > 1e-10 * std::max({1.0, std::abs(a), std::abs(b)}))
          throw Error("metric entries are not symmetric");
      }
  }
}

Metric Metric::minkowski(SpacePtr space) {
  std::vector<ExprPtr> e(kDim * kDim);
  for (int mu = 0; mu < kDim; ++mu)
    for (int nu = 0; nu < kDim; ++nu)
      e[static_cast<std::size_t>(mu * kDim + nu)] =
          lit(mu != nu ? 0.0 : (mu == 0 ? -1.0 : 1.0));
  return Metric(std::move(space), std::move(e));
}

const ExprPtr& Metric::entry(int mu, int nu) const {
  if (mu < 0 || mu >= kDim || nu < 0 || nu >= kDim)
    throw Error("metric index out of range");
  return entry_at(g_, mu, nu);
}

ExprPtr Metric::determinant() const {
  std::array<int, 3> rows{1, 2, 3};
  ExprPtr det = lit(0.0);
  for (int j = 0; j < kDim; ++j) {
    ExprPtr term = mul(entry_at(g_, 0, j), det3(g_, rows, drop(j)));
    det = (j % 2 == 0) ? add(std::move(det), std::move(term))
                       : sub(std::move(det), std::move(term));
  }
  return det;
}

std::array<ExprPtr, 16> Metric::inverse() const {
  ExprPtr det = determinant();
  std::array<ExprPtr, 16> inv;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      // inv_{ij} = cofactor_{ji} / det
      ExprPtr minor = det3(g_, drop(j), drop(i));
      if ((i + j) % 2 != 0) minor = neg(std::move(minor));
      inv[static_cast<std::size_t>(i * kDim + j)] = div(std::move(minor), det);
    }
  return inv;
}

FluidField::FluidField(SpacePtr sp, std::vector<ExprPtr> current, ExprPtr law)
    : space(std::move(sp)), J(std::move(current)), eos(std::move(law)) {
  if (!space) throw Error("fluid field needs a space");
  if (space->base_dim() != kDim || space->field_count() != kDim)
    throw Error("fluid current carries four components over a four-dimensional base");
  if (J.size() != kDim) throw Error("fluid current needs four components");
  for (const auto& c : J) require_base_only(c, "current component");
  if (!eos) throw Error("equation of state is null");
  for (const JetCoord& c : jet_coords(eos))
    if (c.field != 0 || c.order() != 0)
      throw Error("equation of state must be a function of the density value alone");
  // Guard against stray base-coordinate leaves in the law: e(rho) must give
  // the same value wherever the formal variable sits.
  JetPoint q(1, 1, 1);
  for (double r : {0.3, 1.7}) {
    q.set_coord(JetCoord{0, {}}, r);
    q.set_base(0, 0.0);
    double a = eval(eos, q);
    q.set_base(0, 0.9);
    double b = eval(eos, q);
    if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
      throw Error("equation of state must depend on the density alone");
  }
}

FluidPointState extract_state(const FluidField& f, const Metric& g,
                              std::span<const double> x) {
  JetPoint p = spacetime_point(x);
  Eigen::Matrix4d G;
  for (int mu = 0; mu < kDim; ++mu)
    for (int nu = 0; nu < kDim; ++nu) G(mu, nu) = eval(g.entry(mu, nu), p);
  double detg = G.determinant();
  if (std::abs(detg) <= kDegenerateDet)
    throw Error("metric is degenerate at the evaluation point");
  Eigen::Vector4d Jv;
  for (int mu = 0; mu < kDim; ++mu) Jv(mu) = eval(f.J[static_cast<std::size_t>(mu)], p);
  double s = -Jv.dot(G * Jv);
  if (!(s > 0.0))
    throw Error("current is not timelike at the evaluation point");
  double norm = std::sqrt(s);

  FluidPointState st;
  st.rho = norm / std::sqrt(std::abs(detg));
  Eigen::Vector4d up = Jv / norm;
  Eigen::Vector4d lo = G * up;
  for (int mu = 0; mu < kDim; ++mu) {
    st.u_upper[static_cast<std::size_t>(mu)] = up(mu);
    st.u_lower[static_cast<std::size_t>(mu)] = lo(mu);
  }
  JetPoint q(1, 1, 1);
  q.set_coord(JetCoord{0, {}}, st.rho);
  double e = eval(f.eos, q);
  double de = eval(diff(f.eos, JetCoord{0, {}}), q);
  st.pressure = st.rho * st.rho * de;
  st.energy_density = st.rho * (1.0 + e);
  return st;
}

std::vector<double> continuity_residual(const FluidField& f,
                                        std::span<const std::array<double, 4>> pts) {
  ExprPtr divergence = lit(0.0);
  for (int mu = 0; mu < kDim; ++mu)
    divergence = add(std::move(divergence), diff_base(f.J[static_cast<std::size_t>(mu)], mu));
  std::vector<double> out;
  out.reserve(pts.size());
  for (const auto& x : pts) out.push_back(eval(divergence, spacetime_point(x)));
  return out;
}

std::vector<ExprPtr> euler_residual_exprs(const FluidField& f, const Metric& g) {
  ExprPtr s = norm_square(g, f.J);
  ExprPtr norm = sqrt(s);
  ExprPtr det = g.determinant();
  ExprPtr rho = div(norm, sqrt(abs(det)));

  std::vector<ExprPtr> u_up(kDim), u_lo(kDim);
  for (int mu = 0; mu < kDim; ++mu)
    u_up[static_cast<std::size_t>(mu)] = div(f.J[static_cast<std::size_t>(mu)], norm);
  for (int mu = 0; mu < kDim; ++mu)
    u_lo[static_cast<std::size_t>(mu)] = lower_index(g, u_up, mu);

  ExprPtr e_at = substitute_value(f.eos, 0, rho);
  ExprPtr de_at = substitute_value(diff(f.eos, JetCoord{0, {}}), 0, rho);
  ExprPtr pressure = mul(mul(rho, rho), de_at);
  ExprPtr enthalpy = add(mul(rho, add(lit(1.0), e_at)), pressure);  // mu + P

  std::array<ExprPtr, 4> dP;
  for (int nu = 0; nu < kDim; ++nu) dP[static_cast<std::size_t>(nu)] = diff_base(pressure, nu);

  auto ginv = g.inverse();
  // Gamma^lam_{nu mu}, symmetric in (nu, mu)
  auto christoffel = [&](int lam, int nu, int mu) {
    ExprPtr acc = lit(0.0);
    for (int sg = 0; sg < kDim; ++sg) {
      ExprPtr bracket = sub(add(diff_base(g.entry(sg, mu), nu), diff_base(g.entry(sg, nu), mu)),
                            diff_base(g.entry(nu, mu), sg));
      acc = add(std::move(acc), mul(ginv[static_cast<std::size_t>(lam * kDim + sg)], std::move(bracket)));
    }
    return mul(lit(0.5), std::move(acc));
  };

  std::vector<ExprPtr> R(kDim);
  for (int mu = 0; mu < kDim; ++mu) {
    ExprPtr pressure_part = lit(0.0);
    ExprPtr transport_part = lit(0.0);
    for (int nu = 0; nu < kDim; ++nu) {
      ExprPtr proj = mul(u_lo[static_cast<std::size_t>(mu)], u_up[static_cast<std::size_t>(nu)]);
      if (nu == mu) proj = add(std::move(proj), lit(1.0));
      pressure_part = add(std::move(pressure_part), mul(std::move(proj), dP[static_cast<std::size_t>(nu)]));

      ExprPtr cov = diff_base(u_lo[static_cast<std::size_t>(mu)], nu);
      for (int lam = 0; lam < kDim; ++lam)
        cov = sub(std::move(cov), mul(christoffel(lam, nu, mu), u_lo[static_cast<std::size_t>(lam)]));
      transport_part = add(std::move(transport_part), mul(u_up[static_cast<std::size_t>(nu)], std::move(cov)));
    }
    R[static_cast<std::size_t>(mu)] =
        add(std::move(pressure_part), mul(enthalpy, std::move(transport_part)));
  }
  return R;
}

std::vector<std::array<double, 4>> euler_residual(const FluidField& f, const Metric& g,
                                                  std::span<const std::array<double, 4>> pts) {
  std::vector<ExprPtr> R = euler_residual_exprs(f, g);
  std::vector<std::array<double, 4>> out;
  out.reserve(pts.size());
  for (const auto& x : pts) {
    (void)extract_state(f, g, x);  // surfaces degenerate/non-timelike points as errors
    JetPoint p = spacetime_point(x);
    std::array<double, 4> row{};
    for (int mu = 0; mu < kDim; ++mu)
      row[static_cast<std::size_t>(mu)] = eval(R[static_cast<std::size_t>(mu)], p);
    out.push_back(row);
  }
  return out;
}

std::vector<ExprPtr> lie_drag(const FluidField& f, const std::vector<ExprPtr>& X) {
  if (X.size() != kDim) throw Error("drag field needs four components");
  for (const auto& c : X) require_base_only(c, "drag field component");
  std::vector<ExprPtr> out(kDim);
  ExprPtr divX = lit(0.0);
  for (int nu = 0; nu < kDim; ++nu)
    divX = add(std::move(divX), diff_base(X[static_cast<std::size_t>(nu)], nu));
  for (int mu = 0; mu < kDim; ++mu) {
    ExprPtr acc = mul(f.J[static_cast<std::size_t>(mu)], divX);
    for (int nu = 0; nu < kDim; ++nu) {
      acc = add(std::move(acc), mul(diff_base(f.J[static_cast<std::size_t>(mu)], nu), X[static_cast<std::size_t>(nu)]));
      acc = sub(std::move(acc), mul(f.J[static_cast<std::size_t>(nu)], diff_base(X[static_cast<std::size_t>(mu)], nu)));
    }
    out[static_cast<std::size_t>(mu)] = std::move(acc);
  }
  return out;
}

ChetaevTrivialityReport chetaev_triviality(const ConstraintSet& S,
                                           std::span<const JetPoint> pts,
                                           std::span<const double> params) {
  if (pts.empty()) throw Error("at least one probe point is required");
  int dim = -1;
  for (const JetPoint& p : pts) {
    ChetaevKernel k = chetaev_kernel(S, p, params);
    int d = static_cast<int>(k.basis.cols());
    if (dim < 0)
      dim = d;
    else if (d != dim)
      throw Error("kernel dimension varies across the probe points");
  }
  ChetaevTrivialityReport rep;
  rep.kernel_dimension = dim;
  rep.variations_trivial = (dim == 0);
  if (rep.variations_trivial)
    rep.verdict =
        "the velocity gradient of the constraints has full pointwise rank, so the "
        "only admissible variation is zero: every admissible section is "
        "Chetaev-critical, and a criticality notion satisfied by every section is "
        "clearly non-physical";
  else
    rep.verdict = "pointwise admissible variations form a " + std::to_string(dim) +
                  "-dimensional space at each probe point";
  return rep;
}

RefinedIntegral fluid_first_variation(const FluidField& f, const Metric& g,
                                      const std::vector<ExprPtr>& X,
                                      std::span<const double> lo, std::span<const double> hi,
                                      int cells_per_axis, int threads) {
  if (X.size() != kDim) throw Error("variation field needs four components");
  for (const auto& c : X) require_base_only(c, "variation component");
  if (static_cast<int>(lo.size()) != kDim || static_cast<int>(hi.size()) != kDim)
    throw Error("integration box needs four bounds on each side");
  for (int mu = 0; mu < kDim; ++mu)
    if (!(lo[static_cast<std::size_t>(mu)] < hi[static_cast<std::size_t>(mu)]))
      throw Error("integration box is empty");
  if (cells_per_axis < 1) throw Error("cell count must be at least 1");

  // X and d_nu X must vanish on the boundary of the box; probe every fine
  // grid node on each of the eight faces.
  std::vector<ExprPtr> probes;
  probes.reserve(20);
  for (int mu = 0; mu < kDim; ++mu) probes.push_back(X[static_cast<std::size_t>(mu)]);
  for (int mu = 0; mu < kDim; ++mu)
    for (int nu = 0; nu < kDim; ++nu)
      probes.push_back(diff_base(X[static_cast<std::size_t>(mu)], nu));
  const int n = 2 * cells_per_axis;
  auto node = [&](int axis, int k) {
    return lo[static_cast<std::size_t>(axis)] +
           (hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)]) * k / n;
  };
  for (int axis = 0; axis < kDim; ++axis)
    for (int side = 0; side < 2; ++side) {
      std::array<int, 3> rest = drop(axis);
      std::array<double, 4> x{};
      x[static_cast<std::size_t>(axis)] =
          side == 0 ? lo[static_cast<std::size_t>(axis)] : hi[static_cast<std::size_t>(axis)];
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
          for (int k = 0; k <= n; ++k) {
            x[static_cast<std::size_t>(rest[0])] = node(rest[0], i);
            x[static_cast<std::size_t>(rest[1])] = node(rest[1], j);
            x[static_cast<std::size_t>(rest[2])] = node(rest[2], k);
            JetPoint p = spacetime_point(x);
            for (const auto& e : probes)
              if (std::abs(eval(e, p)) > kBoundaryTol)
                throw Error(
                    "variation field must vanish on the boundary of the box "
                    "together with its first derivatives");
          }
    }

  ExprPtr det = g.determinant();
  ExprPtr weight = sqrt(abs(det));
  ExprPtr rho = div(sqrt(norm_square(g, f.J)), weight);
  // d mu / d rho for mu(rho) = rho (1 + e(rho)), composed with rho(x)
  ExprPtr rho_var = jet(*eos_space(), "rho");
  ExprPtr dmu = add(lit(1.0), add(f.eos, mul(rho_var, diff(f.eos, JetCoord{0, {}}))));
  ExprPtr dmu_at = substitute_value(dmu, 0, rho);

  std::vector<ExprPtr> lie = lie_drag(f, X);
  ExprPtr contraction = lit(0.0);
  for (int mu = 0; mu < kDim; ++mu)
    contraction = add(std::move(contraction),
                      mul(div(lower_index(g, f.J, mu), rho), lie[static_cast<std::size_t>(mu)]));
  ExprPtr integrand = neg(mul(weight, mul(dmu_at, std::move(contraction))));

  SectionExpr sigma(f.space, f.J);
  return integrate_refined(integrand, sigma, lo, hi, cells_per_axis, {}, threads);
}

}  // namespace varicon
