#include "tsymp/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace tsymp {

void ShootingConfig::validate() const {
  if (steps < 10) throw SolverError("shooting: steps must be at least 10");
  if (!(tolerance > 0.0) || !(fd_step > 0.0)) throw SolverError("shooting: tolerances must be positive");
  if (max_iterations < 1) throw SolverError("shooting: max_iterations must be at least 1");
  if (!(min_damping > 0.0 && min_damping <= 1.0)) throw SolverError("shooting: min_damping must lie in (0, 1]");
  if (!(armijo >= 0.0 && armijo < 1.0)) throw SolverError("shooting: armijo must lie in [0, 1)");
}

Mat rk4_integrate(const PhaseField& field, const Vec& z0, double horizon, int steps) {
  if (steps < 1) throw SolverError("rk4_integrate: steps must be positive");
  const double h = horizon / steps;
  Mat out(steps + 1, z0.size());
  Vec z = z0;
  out.row(0) = z.transpose();
  for (int s = 0; s < steps; ++s) {
    const Vec k1 = field(z);
    const Vec k2 = field(z + 0.5 * h * k1);
    const Vec k3 = field(z + 0.5 * h * k2);
    const Vec k4 = field(z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.row(s + 1) = z.transpose();
  }
  return out;
}

PhaseField hamiltonian_field(const ProblemSpec& problem) {
  return [&problem](const Vec& z) {
    const Eigen::Index n = problem.dim();
    Vec gx, gp;
    hamiltonian_gradient<double>(problem, Vec(z.head(n)), Vec(z.tail(n)), gx, gp);
    Vec dz(2 * n);
    dz << gp, -gx;
    return dz;
  };
}

PhaseTrajectory hamiltonian_flow(const ProblemSpec& problem, const Vec& p0, int steps) {
  const Eigen::Index n = problem.dim();
  if (p0.size() != n) throw SolverError("hamiltonian_flow: costate dimension mismatch");
  Vec z0(2 * n);
  z0 << problem.x0, p0;
  const auto field = hamiltonian_field(problem);
  const Mat nodes = rk4_integrate(field, z0, problem.horizon, steps);
  PhaseTrajectory out;
  out.times = Vec::LinSpaced(steps + 1, 0.0, problem.horizon);
  out.x = nodes.leftCols(n);
  out.p = nodes.rightCols(n);
  out.xdot.resize(steps + 1, n);
  out.pdot.resize(steps + 1, n);
  out.u.resize(steps + 1, problem.control_size());
  for (int k = 0; k <= steps; ++k) {
    const Vec dz = field(nodes.row(k).transpose());
    out.xdot.row(k) = dz.head(n).transpose();
    out.pdot.row(k) = dz.tail(n).transpose();
    out.u.row(k) = recover_control(problem, nodes.row(k).tail(n).transpose()).transpose();
  }
  return out;
}

namespace {

// Terminal state mismatch of the flow from (x0, p0) over `steps` RK4 steps
// of the problem's horizon.
Vec terminal_mismatch(const ProblemSpec& problem, const PhaseField& field, const Vec& p0, const Vec& target,
                      int steps) {
  const Eigen::Index n = problem.dim();
  Vec z0(2 * n);
  z0 << problem.x0, p0;
  const Mat nodes = rk4_integrate(field, z0, problem.horizon, steps);
  return nodes.row(steps).head(n).transpose() - target;
}

double safe_norm(const Vec& v) {
  const double n = v.norm();
  return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
}

struct NewtonOutcome {
  Vec p;
  double residual;
  int iterations;
  std::vector<double> history;
};

NewtonOutcome newton(const ProblemSpec& problem, const ShootingConfig& config, const Vec& target, Vec p,
                     int steps) {
  const Eigen::Index n = problem.dim();
  const auto field = hamiltonian_field(problem);
  NewtonOutcome out{p, 0.0, 0, {}};
  Vec S = terminal_mismatch(problem, field, p, target, steps);
  double norm = safe_norm(S);
  out.history.push_back(norm);
  for (int it = 0; it < config.max_iterations && norm > config.tolerance && std::isfinite(norm); ++it) {
    Mat J(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = config.fd_step * (1.0 + std::abs(p(j)));
      Vec plus = p, minus = p;
      plus(j) += h;
      minus(j) -= h;
      J.col(j) = (terminal_mismatch(problem, field, plus, target, steps) -
                  terminal_mismatch(problem, field, minus, target, steps)) /
                 (2.0 * h);
    }
    const Vec delta = J.colPivHouseholderQr().solve(-S);
    if (!delta.allFinite()) break;
    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= config.min_damping) {
      const Vec trial = p + lambda * delta;
      const Vec St = terminal_mismatch(problem, field, trial, target, steps);
      const double nt = safe_norm(St);
      if (nt <= (1.0 - config.armijo * lambda) * norm) {
        p = trial;
        S = St;
        norm = nt;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++out.iterations;
    out.history.push_back(norm);
    if (!accepted) break;
  }
  out.p = p;
  out.residual = norm;
  return out;
}

Vec guide_state(const PhaseTrajectory& guide, double t) {
  const auto& times = guide.times;
  Eigen::Index j = 0;
  while (j + 2 < times.size() && times(j + 1) < t) ++j;
  const double w = std::clamp((t - times(j)) / (times(j + 1) - times(j)), 0.0, 1.0);
  return (1.0 - w) * guide.x.row(j).transpose() + w * guide.x.row(j + 1).transpose();
}

}  // namespace

ShootingResult shoot(const ProblemSpec& problem, const ShootingConfig& config, const PhaseTrajectory* guide) {
  config.validate();
  problem.validate();
  const Eigen::Index n = problem.dim();
  Vec p = config.initial_costate.size() == 0 ? Vec::Zero(n) : config.initial_costate;
  if (p.size() != n) throw SolverError("shoot: initial costate has the wrong dimension");
  if (guide && (guide->x.cols() != n || guide->times.size() < 2))
    throw SolverError("shoot: guide trajectory does not match the problem");

  ShootingResult result;
  NewtonOutcome direct = newton(problem, config, problem.xT, p, config.steps);
  result.iterations = direct.iterations;
  result.residual_history = direct.history;
  NewtonOutcome best = direct;

  // With a guide, continuation also runs when the direct solve converged:
  // Newton from p(0) alone can land on a different extremal (the other way
  // round an obstacle), and the point of a guide is to validate its own.
  if (guide) {
    std::optional<NewtonOutcome> guided;
    const double T = problem.horizon;
    const double dt = T / config.steps;
    double solved = 0.0;
    double step = T / 8.0;
    Vec seed = p;
    while (solved < T && step >= config.min_horizon_fraction * T) {
      const double tau = std::min(T, solved + step);
      const int steps = std::max(1, static_cast<int>(std::lround(tau / dt)));
      ProblemSpec prefix = problem;
      prefix.horizon = steps * dt;
      const Vec target = steps == config.steps ? problem.xT : guide_state(*guide, prefix.horizon);
      NewtonOutcome stage = newton(prefix, config, target, seed, steps);
      result.iterations += stage.iterations;
      if (stage.residual <= config.tolerance) {
        solved = prefix.horizon;
        seed = stage.p;
        step *= 1.5;
        if (steps == config.steps) {
          stage.history.insert(stage.history.begin(), result.residual_history.begin(),
                               result.residual_history.end());
          guided = stage;
        }
      } else {
        step *= 0.5;
      }
    }
    if (guided) {
      const bool direct_ok = direct.residual <= config.tolerance;
      const double direct_gap =
          direct_ok ? trajectory_gap(hamiltonian_flow(problem, direct.p, config.steps), *guide) : 0.0;
      const double guided_gap = trajectory_gap(hamiltonian_flow(problem, guided->p, config.steps), *guide);
      if (!direct_ok || guided_gap < direct_gap) best = *guided;
    }
  }

  result.p0 = best.p;
  result.residual = best.residual;
  result.residual_history = best.history;
  result.converged = best.residual <= config.tolerance;
  result.trajectory = hamiltonian_flow(problem, best.p, config.steps);
  return result;
}

PhaseTrajectory rotate_solution(const PhaseTrajectory& trajectory, const ProblemSpec& problem, double angle) {
  if (problem.space_dim != 2) throw SolverError("rotate_solution: planar problems only");
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  auto rotate_blocks = [&](Mat& m) {
    for (Eigen::Index k = 0; k < m.rows(); ++k)
      for (Eigen::Index off = 0; off + 1 < m.cols(); off += 2)
        m.row(k).segment<2>(off) = (rot * m.row(k).segment<2>(off).transpose()).transpose();
  };
  // Agent blocks (w, v) and control blocks are sequences of planar pairs.
  if (problem.state_dim % 2 != 0 || problem.control_dim % 2 != 0)
    throw SolverError("rotate_solution: state and control blocks must be planar pairs");
  PhaseTrajectory out = trajectory;
  rotate_blocks(out.x);
  rotate_blocks(out.p);
  rotate_blocks(out.xdot);
  rotate_blocks(out.pdot);
  rotate_blocks(out.u);
  return out;
}

double trajectory_gap(const PhaseTrajectory& a, const PhaseTrajectory& b) {
  if (a.x.cols() != b.x.cols()) throw SolverError("trajectory_gap: state dimensions differ");
  if (b.times.size() < 2) throw SolverError("trajectory_gap: reference needs two nodes");
  double gap = 0.0;
  Eigen::Index j = 0;
  for (Eigen::Index k = 0; k < a.times.size(); ++k) {
    const double t = a.times(k);
    while (j + 2 < b.times.size() && b.times(j + 1) < t) ++j;
    const double span = b.times(j + 1) - b.times(j);
    const double w = std::clamp((t - b.times(j)) / span, 0.0, 1.0);
    const Vec xb = (1.0 - w) * b.x.row(j).transpose() + w * b.x.row(j + 1).transpose();
    gap = std::max(gap, (a.x.row(k).transpose() - xb).cwiseAbs().maxCoeff());
  }
  return gap;
}

}  // namespace tsymp
