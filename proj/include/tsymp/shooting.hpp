#pragma once

#include "tsymp/problem.hpp"
#include "tsymp/trainer.hpp"
#include "tsymp/types.hpp"

#include <functional>

namespace tsymp {

struct ShootingConfig {
  int steps = 1000;          // RK4 steps over [0, T]
  double tolerance = 1e-10;  // on |x(T) - xT|
  int max_iterations = 50;
  double fd_step = 1e-6;     // column j uses fd_step * (1 + |p_j|)
  double min_damping = 1.0 / 1024.0;
  double armijo = 1e-4;
  Vec initial_costate;  // empty means zero
  /// Smallest horizon increment, as a fraction of T, tried by the guided
  /// continuation before giving up.
  double min_horizon_fraction = 1e-3;

  void validate() const;
};

/// Vector field z -> dz/dt on the stacked phase vector.
using PhaseField = std::function<Vec(const Vec&)>;

/// Classical RK4; rows of the result are the steps + 1 nodes.
Mat rk4_integrate(const PhaseField& field, const Vec& z0, double horizon, int steps);

/// (dH/dp, -dH/dx) for the problem at its current penalty parameters.
PhaseField hamiltonian_field(const ProblemSpec& problem);

/// Integrates the Hamiltonian system from (x0, p0) and fills states,
/// costates, their derivatives and the recovered controls.
PhaseTrajectory hamiltonian_flow(const ProblemSpec& problem, const Vec& p0, int steps);

struct ShootingResult {
  Vec p0;
  PhaseTrajectory trajectory;
  double residual = 0.0;  // |x(T) - xT| at the returned p0
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
};

/// Damped Newton on S(p0) = x(T; p0) - xT with a finite-difference
/// Jacobian. Returns the best iterate; failure is reported, not thrown.
///
/// With a `guide` trajectory (typically the network rollout) the horizon is
/// also grown from a short prefix to T: on [0, tau] the target is the
/// guide's state at tau, and each stage is seeded with the previous stage's
/// p0. This keeps the expanding costate flow of dissipative dynamics finite.
/// Of the converged candidates the one closest to the guide is returned.
ShootingResult shoot(const ProblemSpec& problem, const ShootingConfig& config,
                     const PhaseTrajectory* guide = nullptr);

/// Rotates every planar agent's position, velocity, costate and control
/// blocks about the origin. Requires space_dim == 2.
PhaseTrajectory rotate_solution(const PhaseTrajectory& trajectory, const ProblemSpec& problem, double angle);

/// max over nodes of `a` of |x_a(t) - x_b(t)|_inf, with `b` linearly
/// interpolated at the node times of `a`.
double trajectory_gap(const PhaseTrajectory& a, const PhaseTrajectory& b);

}  // namespace tsymp
