#include "doctest.h"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "varicon/admissibility.hpp"
#include "varicon/fluid.hpp"
#include "varicon/parser.hpp"
#include "support.hpp"

using namespace varicon;
using doctest::Contains;

namespace {

std::vector<ExprPtr> comps(const SpacePtr& S, const char* a, const char* b, const char* c,
                           const char* d) {
  return {parse(a, *S), parse(b, *S), parse(c, *S), parse(d, *S)};
}

std::array<double, 4> random_point(Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::array<double, 4> x{};
  for (auto& v : x) v = rng.uniform(lo, hi);
  return x;
}

// Mildly curved symmetric perturbation of the flat background; stays
// nondegenerate with a timelike x0-direction on the sampling boxes below.
Metric curved_metric(const SpacePtr& S) {
  std::vector<ExprPtr> g(16);
  auto set = [&](int m, int n, const char* s) {
    g[static_cast<std::size_t>(m * 4 + n)] = parse(s, *S);
    g[static_cast<std::size_t>(n * 4 + m)] = g[static_cast<std::size_t>(m * 4 + n)];
  };
  set(0, 0, "-1 + 0.1*sin(x0 + x1)");
  set(1, 1, "1 + 0.12*cos(x1 + x3)");
  set(2, 2, "1 + 0.08*sin(x2)");
  set(3, 3, "1 + 0.1*cos(x0 - x3)");
  set(0, 1, "0.05*sin(x0*x1)");
  set(0, 2, "0.04*cos(x2 + x0)");
  set(0, 3, "0.03*sin(x3)");
  set(1, 2, "0.06*sin(x1 + x2)");
  set(1, 3, "0.05*cos(x1*x3)");
  set(2, 3, "0.04*sin(x2 - x3)");
  return Metric(S, g);
}

FluidField curved_current(const SpacePtr& S) {
  return FluidField(S,
                    comps(S, "1.3 + 0.2*sin(x0 + x2)", "0.25*cos(x1)", "0.2*sin(x0*x3)",
                          "0.15*cos(x2 + x3)"),
                    parse("rho^2/8", *eos_space()));
}

// Divergence-free current from an antisymmetric potential: J^mu = d_nu A^{nu mu}.
std::vector<ExprPtr> potential_current(const SpacePtr& S) {
  std::vector<std::vector<ExprPtr>> A(4, std::vector<ExprPtr>(4, lit(0.0)));
  auto set = [&](int m, int n, const char* s) {
    A[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)] = parse(s, *S);
    A[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] =
        neg(A[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]);
  };
  set(0, 1, "sin(x0 + 2*x1) + x2^2");
  set(0, 2, "cos(x1*x3)");
  set(0, 3, "x0*x2 + sin(x3)");
  set(1, 2, "x3^2 - cos(x0)");
  set(1, 3, "sin(x1 + x2)");
  set(2, 3, "x0 + 0.5*sin(x2)");
  std::vector<ExprPtr> J(4);
  for (int m = 0; m < 4; ++m) {
    ExprPtr acc = lit(0.0);
    for (int n = 0; n < 4; ++n)
      acc = add(acc, diff_base(A[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)], n));
    J[static_cast<std::size_t>(m)] = acc;
  }
  return J;
}

ExprPtr divergence_constraint(const SpacePtr& S) {
  return jet(*S, "J0", {0}) + jet(*S, "J1", {1}) + jet(*S, "J2", {2}) + jet(*S, "J3", {3});
}

// Boosted pressureless column: an exact solution for every rapidity.
FluidField boosted_dust(const SpacePtr& S, double rho0, double rapidity) {
  return FluidField(S,
                    {lit(rho0 * std::cosh(rapidity)), lit(rho0 * std::sinh(rapidity)),
                     lit(0.0), lit(0.0)},
                    parse("0", *eos_space()));
}

// Compactly supported variation on [0,1]^4, tilted so no component is
// symmetric about a cell midpoint.
std::vector<ExprPtr> bump_variation(const SpacePtr& S) {
  const char* bump =
      "(x0*(1 - x0))^2 * (x1*(1 - x1))^2 * (x2*(1 - x2))^2 * (x3*(1 - x3))^2";
  const double scale[4] = {0.3, -0.7, 0.4, 0.2};
  std::vector<ExprPtr> X(4);
  for (int m = 0; m < 4; ++m) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%g * 256 * (1 + 0.5*x%d) * %s", scale[m], (m + 1) % 4,
                  bump);
    X[static_cast<std::size_t>(m)] = parse(buf, *S);
  }
  return X;
}

}  // namespace

// ============================================================
// Point states
// ============================================================

TEST_CASE("density and velocity come out of the current") {
  auto S = fluid_space();
  Metric mink = Metric::minkowski(S);
  Rng rng(4001);

  FluidField dust(S, comps(S, "2", "0", "0", "0"), parse("0", *eos_space()));
  for (int k = 0; k < 5; ++k) {
    const auto st = extract_state(dust, mink, random_point(rng));
    CHECK(st.rho == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(st.u_upper[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(st.u_lower[0] == doctest::Approx(-1.0).epsilon(1e-14));
    for (int i = 1; i < 4; ++i) {
      CHECK(st.u_upper[static_cast<std::size_t>(i)] == 0.0);
      CHECK(st.u_lower[static_cast<std::size_t>(i)] == 0.0);
    }
    CHECK(st.pressure == 0.0);
    CHECK(st.energy_density == doctest::Approx(2.0).epsilon(1e-14));
  }

  // P = rho^2 de/drho: the polytrope e = rho^2/8 gives P = rho^3/4
  FluidField poly(S, comps(S, "1.7", "0", "0", "0"), parse("rho^2/8", *eos_space()));
  const auto st = extract_state(poly, mink, random_point(rng));
  CHECK(vtest::close_rel(st.pressure, 1.7 * 1.7 * 1.7 / 4.0, 1e-14));
  CHECK(vtest::close_rel(st.energy_density, 1.7 * (1.0 + 1.7 * 1.7 / 8.0), 1e-14));

  const auto boosted = extract_state(boosted_dust(S, 1.2, 0.8), mink, random_point(rng));
  CHECK(vtest::close_rel(boosted.rho, 1.2, 1e-14));
  CHECK(vtest::close_rel(boosted.u_upper[0], std::cosh(0.8), 1e-14));
  CHECK(vtest::close_rel(boosted.u_upper[1], std::sinh(0.8), 1e-14));
  CHECK(boosted.pressure == 0.0);
}

TEST_CASE("extracted velocity is unit timelike on a curved background") {
  auto S = fluid_space();
  Metric g = curved_metric(S);
  FluidField f = curved_current(S);
  Rng rng(4002);

  for (int k = 0; k < 30; ++k) {
    const auto x = random_point(rng, -1.5, 1.5);
    const auto st = extract_state(f, g, x);
    JetPoint p(4, 4, 1);
    for (int mu = 0; mu < 4; ++mu) p.set_base(mu, x[static_cast<std::size_t>(mu)]);
    Eigen::Matrix4d G;
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) G(m, n) = eval(g.entry(m, n), p);
    Eigen::Vector4d up, lo;
    for (int m = 0; m < 4; ++m) {
      up(m) = st.u_upper[static_cast<std::size_t>(m)];
      lo(m) = st.u_lower[static_cast<std::size_t>(m)];
    }
    CHECK(std::abs(up.dot(G * up) + 1.0) <= 1e-10);
    CHECK(std::abs(lo.dot(G.inverse() * lo) + 1.0) <= 1e-10);
    CHECK((lo - G * up).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(st.rho > 0.0);
  }
}

TEST_CASE("state extraction rejects bad inputs") {
  auto S = fluid_space();
  auto E = eos_space();
  Metric mink = Metric::minkowski(S);

  FluidField spacelike(S, comps(S, "0", "1", "0", "0"), parse("0", *E));
  CHECK_THROWS_WITH_AS(extract_state(spacelike, mink, std::array<double, 4>{0, 0, 0, 0}),
                       Contains("timelike"), Error);

  FluidField fine(S, comps(S, "2", "0", "0", "0"), parse("0", *E));
  CHECK_THROWS_WITH_AS(extract_state(fine, mink, std::array<double, 3>{0, 0, 0}),
                       Contains("four coordinates"), Error);

  // a metric that loses rank along x1 = 0
  std::vector<ExprPtr> gd(16);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      gd[static_cast<std::size_t>(m * 4 + n)] = lit(m != n ? 0.0 : (m == 0 ? -1.0 : 1.0));
  gd[1 * 4 + 1] = parse("x1", *S);
  Metric degenerate(S, gd);
  CHECK_THROWS_WITH_AS(extract_state(fine, degenerate, std::array<double, 4>{0, 0, 0, 0}),
                       Contains("degenerate"), Error);

  CHECK_THROWS_WITH_AS(FluidField(S, comps(S, "1", "0", "0", "0"), parse("rho + t", *E)),
                       Contains("density alone"), Error);
  CHECK_THROWS_WITH_AS(
      FluidField(S, comps(S, "1", "0", "0", "0"), jet(*E, "rho", {0})),
      Contains("density value alone"), Error);
  CHECK_THROWS_WITH_AS(
      FluidField(S, {parse("1", *S), parse("0", *S), parse("0", *S)}, parse("0", *E)),
      Contains("four components"), Error);
  CHECK_THROWS_WITH_AS(
      FluidField(S, comps(S, "J0", "0", "0", "0"), parse("0", *E)),
      Contains("base coordinates only"), Error);

  std::vector<ExprPtr> asym(16);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      asym[static_cast<std::size_t>(m * 4 + n)] = lit(m != n ? 0.0 : (m == 0 ? -1.0 : 1.0));
  asym[0 * 4 + 1] = parse("x2", *S);
  CHECK_THROWS_WITH_AS(Metric(S, asym), Contains("symmetric"), Error);
  CHECK_THROWS_WITH_AS(Metric(S, std::vector<ExprPtr>(15, lit(1.0))),
                       Contains("16 entries"), Error);
}

// ============================================================
// Residuals
// ============================================================

TEST_CASE("continuity residual is the plain divergence") {
  auto S = fluid_space();
  auto E = eos_space();
  Rng rng(4003);
  std::vector<std::array<double, 4>> pts;
  for (int k = 0; k < 20; ++k) pts.push_back(random_point(rng));

  FluidField constant(S, comps(S, "1.4", "0.2", "-0.1", "0.3"), parse("0", *E));
  for (double r : continuity_residual(constant, pts)) CHECK(r == 0.0);

  // transverse profile: J = (f(x1), 0, 0, 0) has no x0 dependence
  FluidField transverse(S, comps(S, "2 + sin(x1)", "0", "0", "0"), parse("0", *E));
  for (double r : continuity_residual(transverse, pts)) CHECK(r == 0.0);

  FluidField linear(S, comps(S, "x0", "0", "0", "0"), parse("0", *E));
  for (double r : continuity_residual(linear, pts)) CHECK(r == 1.0);

  FluidField potential(S, potential_current(S), parse("0", *E));
  for (double r : continuity_residual(potential, pts)) CHECK(std::abs(r) <= 1e-12);
}

TEST_CASE("metric inverse and determinant agree with direct linear algebra") {
  auto S = fluid_space();
  Metric g = curved_metric(S);
  const auto inv = g.inverse();
  const ExprPtr det = g.determinant();
  Rng rng(4004);

  for (int k = 0; k < 20; ++k) {
    JetPoint p(4, 4, 1);
    for (int mu = 0; mu < 4; ++mu) p.set_base(mu, rng.uniform(-1.5, 1.5));
    Eigen::Matrix4d G, Gi;
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) {
        G(m, n) = eval(g.entry(m, n), p);
        Gi(m, n) = eval(inv[static_cast<std::size_t>(m * 4 + n)], p);
      }
    CHECK((Gi * G - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(vtest::close_rel(eval(det, p), G.determinant(), 1e-12));
  }

  JetPoint origin(4, 4, 1);
  CHECK(eval(Metric::minkowski(S).determinant(), origin) == -1.0);
}

TEST_CASE("momentum balance vanishes on the uniform and boosted states") {
  auto S = fluid_space();
  Metric mink = Metric::minkowski(S);
  Rng rng(4005);
  std::vector<std::array<double, 4>> pts;
  for (int k = 0; k < 50; ++k) pts.push_back(random_point(rng));

  FluidField uniform(S, comps(S, "1.7", "0", "0", "0"), parse("rho^2/8", *eos_space()));
  for (const auto& row : euler_residual(uniform, mink, pts))
    for (double r : row) CHECK(std::abs(r) <= 1e-12);

  for (const auto& row : euler_residual(boosted_dust(S, 1.2, 0.8), mink, pts))
    for (double r : row) CHECK(std::abs(r) <= 1e-12);
}

TEST_CASE("pressure gradient drives the momentum residual") {
  auto S = fluid_space();
  Metric mink = Metric::minkowski(S);
  // stiff law e = rho on a static column: P = rho^2 and R_1 = dP/dx1
  FluidField f(S, comps(S, "1.5 + 0.3*sin(x1)", "0", "0", "0"), parse("rho", *eos_space()));
  Rng rng(4006);

  for (int k = 0; k < 20; ++k) {
    const auto x = random_point(rng, -1.0, 1.0);
    const auto row = euler_residual(f, mink, std::vector{x})[0];
    const double fv = 1.5 + 0.3 * std::sin(x[1]);
    const double hand = 2.0 * fv * 0.3 * std::cos(x[1]);
    CHECK(vtest::close_rel(row[1], hand, 1e-9));
    CHECK(std::abs(row[0]) <= 1e-12);
    CHECK(std::abs(row[2]) <= 1e-12);
    CHECK(std::abs(row[3]) <= 1e-12);
    // the residual is honestly nonzero: this family solves nothing
    CHECK(std::abs(row[1]) > 1e-3);

    // independent oracle: difference the extracted pressure itself
    const double h = 1e-5;
    auto xp = x, xm = x;
    xp[1] += h;
    xm[1] -= h;
    const double fd =
        (extract_state(f, mink, xp).pressure - extract_state(f, mink, xm).pressure) / (2 * h);
    CHECK(vtest::close_rel(row[1], fd, 1e-6));
  }
}

TEST_CASE("curved-background residual matches a finite-difference assembly") {
  auto S = fluid_space();
  Metric g = curved_metric(S);
  FluidField f = curved_current(S);
  const auto R = euler_residual_exprs(f, g);
  Rng rng(4007);

  for (int k = 0; k < 10; ++k) {
    const auto x = random_point(rng, -1.0, 1.0);
    JetPoint p(4, 4, 1);
    for (int mu = 0; mu < 4; ++mu) p.set_base(mu, x[static_cast<std::size_t>(mu)]);
    const auto st = extract_state(f, g, x);

    const double h = 1e-5;
    auto shifted = [&](int nu, double d) {
      auto y = x;
      y[static_cast<std::size_t>(nu)] += d;
      return y;
    };
    std::array<double, 4> dP{};
    std::array<std::array<double, 4>, 4> du{};
    std::array<Eigen::Matrix4d, 4> dG;
    Eigen::Matrix4d G;
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) G(m, n) = eval(g.entry(m, n), p);
    for (int nu = 0; nu < 4; ++nu) {
      const auto sp = extract_state(f, g, shifted(nu, h));
      const auto sm = extract_state(f, g, shifted(nu, -h));
      dP[static_cast<std::size_t>(nu)] = (sp.pressure - sm.pressure) / (2 * h);
      for (int m = 0; m < 4; ++m)
        du[static_cast<std::size_t>(nu)][static_cast<std::size_t>(m)] =
            (sp.u_lower[static_cast<std::size_t>(m)] - sm.u_lower[static_cast<std::size_t>(m)]) /
            (2 * h);
      JetPoint pp = p, pm = p;
      pp.set_base(nu, x[static_cast<std::size_t>(nu)] + h);
      pm.set_base(nu, x[static_cast<std::size_t>(nu)] - h);
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
          dG[static_cast<std::size_t>(nu)](m, n) =
              (eval(g.entry(m, n), pp) - eval(g.entry(m, n), pm)) / (2 * h);
    }
    const Eigen::Matrix4d Gi = G.inverse();
    auto gamma = [&](int lam, int nu, int mu) {
      double acc = 0.0;
      for (int sg = 0; sg < 4; ++sg)
        acc += Gi(lam, sg) * (dG[static_cast<std::size_t>(nu)](sg, mu) +
                              dG[static_cast<std::size_t>(mu)](sg, nu) -
                              dG[static_cast<std::size_t>(sg)](nu, mu));
      return 0.5 * acc;
    };
    const double enthalpy = st.energy_density + st.pressure;
    for (int m = 0; m < 4; ++m) {
      double rfd = 0.0;
      for (int nu = 0; nu < 4; ++nu) {
        const double proj =
            st.u_lower[static_cast<std::size_t>(m)] * st.u_upper[static_cast<std::size_t>(nu)] +
            (nu == m ? 1.0 : 0.0);
        rfd += proj * dP[static_cast<std::size_t>(nu)];
        double cov = du[static_cast<std::size_t>(nu)][static_cast<std::size_t>(m)];
        for (int lam = 0; lam < 4; ++lam)
          cov -= gamma(lam, nu, m) * st.u_lower[static_cast<std::size_t>(lam)];
        rfd += enthalpy * st.u_upper[static_cast<std::size_t>(nu)] * cov;
      }
      CHECK(vtest::close_rel(eval(R[static_cast<std::size_t>(m)], p), rfd, 1e-8));
    }
  }
}

TEST_CASE("internal energy law fixes pressure and enthalpy together") {
  auto E = eos_space();
  const ExprPtr rho = jet(*E, "rho");
  Rng rng(4008);
  const char* laws[] = {"0", "rho", "rho^2/8", "0.4*rho + 0.05*rho^2", "sqrt(rho)"};

  for (const char* s : laws) {
    const ExprPtr e = parse(s, *E);
    const ExprPtr mu = mul(rho, add(lit(1.0), e));
    const ExprPtr P = mul(mul(rho, rho), diff(e, JetCoord{0, {}}));
    // rho * dmu/drho = mu + P is what makes P = rho^2 de/drho the pressure
    const ExprPtr lhs = mul(rho, diff(mu, JetCoord{0, {}}));
    const ExprPtr rhs = add(mu, P);
    for (int k = 0; k < 20; ++k) {
      JetPoint q(1, 1, 1);
      q.set_coord(JetCoord{0, {}}, rng.uniform(0.1, 3.0));
      CHECK(vtest::close_rel(eval(lhs, q), eval(rhs, q), 1e-10));
    }
  }
}

// ============================================================
// Dragging and admissibility
// ============================================================

TEST_CASE("dragging the current preserves the divergence") {
  auto S = fluid_space();
  auto E = eos_space();
  Rng rng(4009);

  FluidField constant(S, comps(S, "1.4", "0.2", "-0.1", "0.3"), parse("0", *E));
  const auto still = lie_drag(constant, comps(S, "1", "2", "3", "4"));
  JetPoint p0(4, 4, 1);
  for (const auto& c : still) CHECK(is_zero(c));

  // uniform current dragged by X = (0, x0, 0, 0): only the boost row survives
  FluidField unit(S, comps(S, "1", "0", "0", "0"), parse("0", *E));
  const auto boosted = lie_drag(unit, comps(S, "0", "x0", "0", "0"));
  for (int k = 0; k < 10; ++k) {
    JetPoint p(4, 4, 1);
    for (int mu = 0; mu < 4; ++mu) p.set_base(mu, rng.uniform(-2.0, 2.0));
    CHECK(eval(boosted[0], p) == 0.0);
    CHECK(eval(boosted[1], p) == -1.0);
    CHECK(eval(boosted[2], p) == 0.0);
    CHECK(eval(boosted[3], p) == 0.0);
  }

  // divergence-free current: the drag stays divergence-free
  FluidField f(S, potential_current(S), parse("rho", *E));
  const auto X = comps(S, "0.4*sin(x1)", "x0*x2", "cos(x3)", "0.3*x1^2");
  const auto L = lie_drag(f, X);
  ExprPtr divL = lit(0.0);
  for (int m = 0; m < 4; ++m) divL = add(divL, diff_base(L[static_cast<std::size_t>(m)], m));
  for (int k = 0; k < 50; ++k) {
    JetPoint p(4, 4, 1);
    for (int mu = 0; mu < 4; ++mu) p.set_base(mu, rng.uniform(-2.0, 2.0));
    CHECK(std::abs(eval(divL, p)) <= 1e-9);
  }

  // same conclusion through the tangency machinery of the constraint
  ConstraintSet div_set(S, {divergence_constraint(S)});
  VerticalField V(S, L);
  SectionExpr sigma(S, f.J);
  std::vector<std::vector<double>> pts;
  for (int k = 0; k < 20; ++k)
    pts.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                   rng.uniform(-2.0, 2.0)});
  for (const auto& row : vak_tangency_residual(div_set, V, sigma, pts, {}))
    for (double r : row) CHECK(std::abs(r) <= 1e-9);

  CHECK_THROWS_WITH_AS(lie_drag(f, {parse("1", *S)}), Contains("four components"), Error);
}

TEST_CASE("a twist of the uniform fluid moves the boundary but not the current") {
  // The induced variation of J can vanish identically although the
  // generating field is active on the boundary: a time-independent
  // volume-preserving rotation drags the uniform column onto itself.
  // Boundary conditions imposed on Lie_X J therefore do not constrain X
  // itself on the boundary.
  auto S = fluid_space();
  FluidField f(S, comps(S, "1", "0", "0", "0"), parse("0", *eos_space()));
  const auto X = comps(S, "0", "0 - x2", "x1", "0");
  const auto L = lie_drag(f, X);
  Rng rng(4010);

  double sup_X_boundary = 0.0;
  for (int k = 0; k < 30; ++k) {
    JetPoint p(4, 4, 1);
    p.set_base(0, rng.uniform(-1.0, 1.0));
    p.set_base(1, 1.0);  // on an x1-face of the box [-1,1]^4
    p.set_base(2, rng.uniform(-1.0, 1.0));
    p.set_base(3, rng.uniform(-1.0, 1.0));
    for (const auto& c : L) CHECK(eval(c, p) == 0.0);
    for (const auto& c : X)
      sup_X_boundary = std::max(sup_X_boundary, std::abs(eval(c, p)));
  }
  CHECK(sup_X_boundary >= 1.0);
}

TEST_CASE("pointwise constraint admits only the zero variation") {
  auto S = fluid_space();
  Rng rng(4011);
  std::vector<JetPoint> pts;
  for (int k = 0; k < 50; ++k) pts.push_back(vtest::random_jet_point(*S, 1, rng, -2.0, 2.0));

  // velocity gradient of d_mu J^mu is the identity pairing: full rank everywhere
  ConstraintSet div_set(S, {divergence_constraint(S)});
  const auto rep = chetaev_triviality(div_set, pts);
  CHECK(rep.kernel_dimension == 0);
  CHECK(rep.variations_trivial);
  CHECK(rep.verdict.find("every admissible section is Chetaev-critical") != std::string::npos);
  CHECK(rep.verdict.find("non-physical") != std::string::npos);

  // value-level constraint: no velocity dependence, so everything is admissible
  ConstraintSet holo(S, {jet(*S, "J0")});
  const auto rep2 = chetaev_triviality(holo, pts);
  CHECK(rep2.kernel_dimension == 4);
  CHECK_FALSE(rep2.variations_trivial);
  CHECK(rep2.verdict.find("4-dimensional") != std::string::npos);

  CHECK_THROWS_WITH_AS(chetaev_triviality(div_set, std::vector<JetPoint>{}),
                       Contains("at least one probe point"), Error);

  // rank drops exactly on x0 = 0: mixed probes are rejected, not averaged
  ConstraintSet pinch(S, {mul(base_coord(0), jet(*S, "J0", {0}))});
  std::vector<JetPoint> mixed;
  mixed.push_back(vtest::random_jet_point(*S, 1, rng));
  mixed.front().set_base(0, 0.0);
  mixed.push_back(vtest::random_jet_point(*S, 1, rng));
  mixed.back().set_base(0, 1.0);
  CHECK_THROWS_WITH_AS(chetaev_triviality(pinch, mixed), Contains("varies"), Error);
}

// ============================================================
// First variation
// ============================================================

TEST_CASE("first variation vanishes on exact solutions") {
  auto S = fluid_space();
  Metric mink = Metric::minkowski(S);
  const auto X = bump_variation(S);
  const std::vector<double> lo{0, 0, 0, 0}, hi{1, 1, 1, 1};

  FluidField uniform(S, comps(S, "1.7", "0", "0", "0"), parse("rho^2/8", *eos_space()));
  const auto ru = fluid_first_variation(uniform, mink, X, lo, hi, 6);
  CHECK(std::abs(ru.value) <= 1e-6);
  CHECK(std::abs(ru.value) <= std::abs(ru.coarse - ru.fine) + 1e-12);

  const auto rd = fluid_first_variation(boosted_dust(S, 1.2, 0.8), mink, X, lo, hi, 6);
  CHECK(std::abs(rd.value) <= 1e-6);
  CHECK(std::abs(rd.value) <= std::abs(rd.coarse - rd.fine) + 1e-12);
}

TEST_CASE("first variation integrates the residual against the variation") {
  auto S = fluid_space();
  Metric mink = Metric::minkowski(S);
  const auto X = bump_variation(S);
  const std::vector<double> lo{0, 0, 0, 0}, hi{1, 1, 1, 1};

  // off-shell column: compare against the residual paired with X directly
  FluidField f(S, comps(S, "1.5 + 0.3*sin(x1)", "0", "0", "0"), parse("rho", *eos_space()));
  const auto fv = fluid_first_variation(f, mink, X, lo, hi, 10);

  const auto R = euler_residual_exprs(f, mink);
  ExprPtr paired = lit(0.0);
  for (int m = 0; m < 4; ++m)
    paired = add(paired, mul(R[static_cast<std::size_t>(m)], X[static_cast<std::size_t>(m)]));
  SectionExpr sigma(S, f.J);
  const auto direct = integrate_refined(paired, sigma, lo, hi, 10, {});

  CHECK(std::abs(direct.value) > 1e-5);
  CHECK(vtest::close_rel(fv.value, -direct.value, 1e-3));
}

TEST_CASE("first variation rejects boundary-active variation fields") {
  auto S = fluid_space();
  Metric mink = Metric::minkowski(S);
  FluidField f(S, comps(S, "1.7", "0", "0", "0"), parse("0", *eos_space()));
  const std::vector<double> lo{0, 0, 0, 0}, hi{1, 1, 1, 1};

  CHECK_THROWS_WITH_AS(fluid_first_variation(f, mink, comps(S, "1", "0", "0", "0"), lo, hi, 2),
                       Contains("vanish on the boundary"), Error);

  // first power vanishes on the faces, its normal derivative does not
  const auto XP = comps(
      S, "x0*(1 - x0) * x1*(1 - x1) * x2*(1 - x2) * x3*(1 - x3)", "0", "0", "0");
  CHECK_THROWS_WITH_AS(fluid_first_variation(f, mink, XP, lo, hi, 2),
                       Contains("vanish on the boundary"), Error);

  CHECK_THROWS_WITH_AS(
      fluid_first_variation(f, mink, bump_variation(S), std::vector<double>{0, 0, 0},
                            std::vector<double>{1, 1, 1}, 2),
      Contains("four bounds"), Error);
  CHECK_THROWS_WITH_AS(fluid_first_variation(f, mink, bump_variation(S), lo,
                                             std::vector<double>{1, 0, 1, 1}, 2),
                       Contains("empty"), Error);
  CHECK_THROWS_WITH_AS(fluid_first_variation(f, mink, bump_variation(S), lo, hi, 0),
                       Contains("at least 1"), Error);
}
