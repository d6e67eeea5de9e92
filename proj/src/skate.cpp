#include "varicon/skate.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "varicon/errors.hpp"
#include "varicon/jet_point.hpp"
#include "varicon/multiplier.hpp"
#include "varicon/parser.hpp"

namespace varicon {
namespace {

constexpr double kInitConstraintTol = 1e-10;
constexpr double kSingularSpeed = 1e-8;

double blade_residual(double theta, double vx, double vy) {
  return vx * std::sin(theta) - vy * std::cos(theta);
}

double along_blade_speed(double theta, double vx, double vy) {
  return vx * std::cos(theta) + vy * std::sin(theta);
}

double mech_energy(const SkateParams& p, const TrajectorySample& s) {
  return 0.5 * p.mass * (s.vx * s.vx + s.vy * s.vy) + 0.5 * p.inertia * s.omega * s.omega +
         p.mass * p.gravity * s.y;
}

void check_params(const SkateParams& p) {
  if (!(p.mass > 0.0) || !(p.inertia > 0.0)) throw Error("mass and inertia must be positive");
  if (!std::isfinite(p.gravity)) throw Error("gravity must be finite");
}

void check_grid(double dt, int steps) {
  if (!(dt > 0.0)) throw Error("time step must be positive");
  if (steps < 1) throw Error("step count must be at least 1");
}

void check_initial_constraint(const MechState& s) {
  if (std::abs(blade_residual(s.theta, s.vx, s.vy)) > kInitConstraintTol)
    throw Error("initial velocity violates the blade constraint");
}

}  // namespace

Trajectory integrate_nh(const SkateParams& params, const MechState& init, double dt,
                        int steps) {
  check_params(params);
  check_grid(dt, steps);
  check_initial_constraint(init);

  // Reduced coordinates: position, heading, along-blade speed, turning rate.
  struct Reduced {
    double x, y, theta, v, omega;
  };
  const double g = params.gravity;
  auto rate = [g](const Reduced& s) {
    return Reduced{s.v * std::cos(s.theta), s.v * std::sin(s.theta), s.omega,
                   -g * std::sin(s.theta), 0.0};
  };
  auto shift = [](const Reduced& s, const Reduced& k, double h) {
    return Reduced{s.x + h * k.x, s.y + h * k.y, s.theta + h * k.theta, s.v + h * k.v,
                   s.omega + h * k.omega};
  };

  Trajectory out;
  out.dt = dt;
  out.samples.reserve(static_cast<std::size_t>(steps) + 1);

  Reduced s{init.x, init.y, init.theta,
            init.vx * std::cos(init.theta) + init.vy * std::sin(init.theta), init.omega};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto record = [&](double t) {
    TrajectorySample row;
    row.t = t;
    row.x = s.x;
    row.y = s.y;
    row.theta = s.theta;
    row.vx = s.v * std::cos(s.theta);
    row.vy = s.v * std::sin(s.theta);
    row.omega = s.omega;
    row.lambda = nan;
    row.phi_residual = blade_residual(row.theta, row.vx, row.vy);
    row.energy = mech_energy(params, row);
    out.samples.push_back(row);
  };

  record(init.t);
  for (int n = 0; n < steps; ++n) {
    const Reduced k1 = rate(s);
    const Reduced k2 = rate(shift(s, k1, dt / 2));
    const Reduced k3 = rate(shift(s, k2, dt / 2));
    const Reduced k4 = rate(shift(s, k3, dt));
    s = Reduced{s.x + dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
                s.y + dt / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
                s.theta + dt / 6 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta),
                s.v + dt / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v),
                s.omega + dt / 6 * (k1.omega + 2 * k2.omega + 2 * k3.omega + k4.omega)};
    record(init.t + (n + 1) * dt);
  }
  return out;
}

struct SkateVakSolver::Impl {
  // Rows {x, y, theta, d_t Phi} of the tangency system, affine in
  // (xdd, ydd, thetadd, lambdadot).  The coefficient matrix and the
  // zero-acceleration remainder are extracted symbolically once, with the
  // physical parameters folded in.
  std::array<std::array<ExprPtr, 4>, 4> coeff;
  std::array<ExprPtr, 4> rest;
  ExprPtr speed;  // along-blade speed, the singular-band guard
  mutable JetPoint point{1, 4, 2};

  explicit Impl(const SkateParams& p) {
    auto sp = make_space(1, {"x", "y", "theta"}, {"m", "I", "g"});
    const ExprPtr L = parse("m/2*(d(x,0)^2 + d(y,0)^2) + I/2*d(theta,0)^2 - m*g*y", *sp);
    const ConstraintSet S(sp, {parse("d(x,0)*sin(theta) - d(y,0)*cos(theta)", *sp)});
    const MultiplierSystem sys = vak_system(L, S);

    const std::array<JetCoord, 4> unknowns{
        JetCoord{0, MultiIndex{0, 0}},  // xdd
        JetCoord{1, MultiIndex{0, 0}},  // ydd
        JetCoord{2, MultiIndex{0, 0}},  // thetadd
        JetCoord{3, MultiIndex{0}},     // lambdadot
    };
    std::array<ExprPtr, 4> rows{sys.rows[0], sys.rows[1], sys.rows[2],
                                formal_derivative(sys.rows[3], 0)};

    const std::array<double, 3> vals{p.mass, p.inertia, p.gravity};
    for (std::size_t i = 0; i < 4; ++i) {
      ExprPtr base = rows[i];
      for (std::size_t j = 0; j < 4; ++j) {
        coeff[i][j] = bind_params(diff(rows[i], unknowns[j]), vals);
        base = substitute_coord(base, unknowns[j], 0.0);
      }
      rest[i] = bind_params(base, vals);
    }
    speed = bind_params(
        parse("d(x,0)*cos(theta) + d(y,0)*sin(theta)", *sys.extended), vals);
  }

  void load(const MechState& s) const {
    point.set_base(0, s.t);
    point.set_coord({0, {}}, s.x);
    point.set_coord({1, {}}, s.y);
    point.set_coord({2, {}}, s.theta);
    point.set_coord({3, {}}, s.lambda);
    point.set_coord({0, {0}}, s.vx);
    point.set_coord({1, {0}}, s.vy);
    point.set_coord({2, {0}}, s.omega);
    point.set_coord({3, {0}}, 0.0);
    for (int f = 0; f < 4; ++f) point.set_coord({f, {0, 0}}, 0.0);
  }
};

SkateVakSolver::SkateVakSolver(const SkateParams& params) {
  check_params(params);
  impl_ = std::make_unique<Impl>(params);
}
SkateVakSolver::~SkateVakSolver() = default;
SkateVakSolver::SkateVakSolver(SkateVakSolver&&) noexcept = default;
SkateVakSolver& SkateVakSolver::operator=(SkateVakSolver&&) noexcept = default;

std::optional<VakRates> SkateVakSolver::rates(const MechState& s) const {
  const Impl& im = *impl_;
  im.load(s);
  if (std::abs(eval(im.speed, im.point)) < kSingularSpeed) return std::nullopt;

  Eigen::Matrix4d A;
  Eigen::Vector4d b;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) A(i, j) = eval(im.coeff[i][j], im.point);
    b(i) = -eval(im.rest[i], im.point);
  }
  const Eigen::Vector4d u = A.partialPivLu().solve(b);
  return VakRates{u(0), u(1), u(2), u(3)};
}

Trajectory integrate_vak(const SkateParams& params, const MechState& init, double dt,
                         int steps) {
  check_grid(dt, steps);
  check_initial_constraint(init);
  if (std::abs(along_blade_speed(init.theta, init.vx, init.vy)) < kSingularSpeed)
    throw Error("initial along-blade speed lies in the singular band");
  const SkateVakSolver solver(params);

  struct Full {
    double x, y, theta, lambda, vx, vy, omega;
  };
  struct FullRate {
    double x, y, theta, lambda, vx, vy, omega;
  };
  auto rate = [&](const Full& s) -> std::optional<FullRate> {
    MechState q;
    q.x = s.x;
    q.y = s.y;
    q.theta = s.theta;
    q.lambda = s.lambda;
    q.vx = s.vx;
    q.vy = s.vy;
    q.omega = s.omega;
    const auto r = solver.rates(q);
    if (!r) return std::nullopt;
    return FullRate{s.vx, s.vy, s.omega, r->lambda_dot, r->ax, r->ay, r->alpha};
  };
  auto shift = [](const Full& s, const FullRate& k, double h) {
    return Full{s.x + h * k.x,       s.y + h * k.y,   s.theta + h * k.theta,
                s.lambda + h * k.lambda, s.vx + h * k.vx, s.vy + h * k.vy,
                s.omega + h * k.omega};
  };

  Trajectory out;
  out.dt = dt;
  out.samples.reserve(static_cast<std::size_t>(steps) + 1);

  Full s{init.x, init.y, init.theta, init.lambda, init.vx, init.vy, init.omega};
  auto record = [&](double t) {
    TrajectorySample row;
    row.t = t;
    row.x = s.x;
    row.y = s.y;
    row.theta = s.theta;
    row.vx = s.vx;
    row.vy = s.vy;
    row.omega = s.omega;
    row.lambda = s.lambda;
    row.phi_residual = blade_residual(s.theta, s.vx, s.vy);
    row.energy = mech_energy(params, row);
    out.samples.push_back(row);
  };

  record(init.t);
  for (int n = 0; n < steps; ++n) {
    const auto k1 = rate(s);
    if (!k1) break;
    const auto k2 = rate(shift(s, *k1, dt / 2));
    if (!k2) break;
    const auto k3 = rate(shift(s, *k2, dt / 2));
    if (!k3) break;
    const auto k4 = rate(shift(s, *k3, dt));
    if (!k4) break;
    const Full next{
        s.x + dt / 6 * (k1->x + 2 * k2->x + 2 * k3->x + k4->x),
        s.y + dt / 6 * (k1->y + 2 * k2->y + 2 * k3->y + k4->y),
        s.theta + dt / 6 * (k1->theta + 2 * k2->theta + 2 * k3->theta + k4->theta),
        s.lambda + dt / 6 * (k1->lambda + 2 * k2->lambda + 2 * k3->lambda + k4->lambda),
        s.vx + dt / 6 * (k1->vx + 2 * k2->vx + 2 * k3->vx + k4->vx),
        s.vy + dt / 6 * (k1->vy + 2 * k2->vy + 2 * k3->vy + k4->vy),
        s.omega + dt / 6 * (k1->omega + 2 * k2->omega + 2 * k3->omega + k4->omega)};
    // The flow must not be continued across the singular locus: halt when
    // the along-blade speed lands in the band or changes sign over the step.
    const double d_old = along_blade_speed(s.theta, s.vx, s.vy);
    const double d_new = along_blade_speed(next.theta, next.vx, next.vy);
    if (std::abs(d_new) < kSingularSpeed || d_old * d_new < 0.0) break;
    s = next;
    record(init.t + (n + 1) * dt);
  }
  if (out.samples.size() != static_cast<std::size_t>(steps) + 1)
    out.stop = StopReason::singular_speed;
  return out;
}

TrajectoryComparison compare_trajectories(const Trajectory& a, const Trajectory& b,
                                          double threshold) {
  if (a.samples.empty() || b.samples.empty()) throw Error("cannot compare empty trajectories");
  if (std::abs(a.dt - b.dt) > 1e-15) throw Error("trajectories use different time steps");
  if (!(threshold > 0.0)) throw Error("comparison threshold must be positive");

  TrajectoryComparison c;
  c.first_crossing_time = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = std::min(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = a.samples[i];
    const auto& q = b.samples[i];
    const double dx = std::abs(p.x - q.x);
    const double dy = std::abs(p.y - q.y);
    const double dth = std::abs(p.theta - q.theta);
    c.sup_x = std::max(c.sup_x, dx);
    c.sup_y = std::max(c.sup_y, dy);
    c.sup_theta = std::max(c.sup_theta, dth);
    const double d = std::max({dx, dy, dth});
    if (!c.crossed && d > threshold) {
      c.crossed = true;
      c.first_crossing_time = p.t;
    }
  }
  c.sup_overall = std::max({c.sup_x, c.sup_y, c.sup_theta});
  return c;
}

}  // namespace varicon
