#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "varicon/expr.hpp"

namespace varicon {

// Planar skating body: point mass with a heading angle, free to move along
// its blade direction (cos theta, sin theta) but not across it.  Gravity
// pulls along -y.
struct SkateParams {
  double mass = 1.0;
  double inertia = 1.0;
  double gravity = 9.81;
};

struct MechState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
  double lambda = 0.0;  // multiplier value; only the tangency flow evolves it
};

enum class StopReason {
  completed,
  // The along-blade speed entered the +-1e-8 band around zero, where the
  // tangency dynamics loses its multiplier.
  singular_speed,
};

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0, y = 0.0, theta = 0.0;
  double vx = 0.0, vy = 0.0, omega = 0.0;
  double lambda = 0.0;        // NaN on the pointwise branch
  double phi_residual = 0.0;  // blade constraint at the sample
  double energy = 0.0;        // kinetic + potential
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  StopReason stop = StopReason::completed;
  double dt = 0.0;
};

// Pointwise-constrained (nonholonomic) flow.  The constraint reduces the
// dynamics to heading, turning rate and along-blade speed; classic RK4 on
// the reduced system.  The initial velocity must satisfy the constraint to
// 1e-10.  lambda is reported as NaN.
Trajectory integrate_nh(const SkateParams& params, const MechState& init, double dt,
                        int steps);

// Tangency-constrained (vakonomic) flow: the variational equations of
// L + lambda*Phi.  Each stage solves the linear system in the accelerations
// and the multiplier rate that the symbolic rows define.  lambda starts at
// init.lambda and is carried as state.  Halts with singular_speed when the
// along-blade speed degenerates; the samples up to that point are kept.
Trajectory integrate_vak(const SkateParams& params, const MechState& init, double dt,
                         int steps);

struct VakRates {
  double ax = 0.0;
  double ay = 0.0;
  double alpha = 0.0;       // heading acceleration
  double lambda_dot = 0.0;
};

// Reusable stage solver for the tangency flow; builds the symbolic rows once.
class SkateVakSolver {
 public:
  explicit SkateVakSolver(const SkateParams& params);
  ~SkateVakSolver();
  SkateVakSolver(SkateVakSolver&&) noexcept;
  SkateVakSolver& operator=(SkateVakSolver&&) noexcept;

  // Accelerations and multiplier rate at the state, or nothing when the
  // along-blade speed is inside the singular band.
  std::optional<VakRates> rates(const MechState& s) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct TrajectoryComparison {
  double sup_x = 0.0;
  double sup_y = 0.0;
  double sup_theta = 0.0;
  double sup_overall = 0.0;
  bool crossed = false;
  double first_crossing_time = 0.0;  // NaN unless crossed
};

// Pointwise sups of the configuration differences over the common samples.
// Requires matching time grids; trajectories of different lengths (one may
// have halted) are compared over the shorter prefix.
TrajectoryComparison compare_trajectories(const Trajectory& a, const Trajectory& b,
                                          double threshold);

}  // namespace varicon
