#include "tsymp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace tsymp {

void TrainConfig::validate() const {
  if (grid_steps < 1) throw SolverError("train: grid_steps must be at least 1");
  if (samples < 2) throw SolverError("train: samples must be at least 2");
  if (!(loss_threshold > 0.0)) throw SolverError("train: loss_threshold must be positive");
  if (max_iterations < 1) throw SolverError("train: max_iterations must be at least 1");
  if (warmup_stages < 0) throw SolverError("train: warmup_stages must be non-negative");
  if (net.pairs < 1 || net.width < 1 || net.sublayers < 0 || net.subwidth < 1)
    throw SolverError("train: invalid network shape");
  adam.validate();
  schedule.validate();
}

Vec sample_times(int samples, double horizon, std::mt19937_64& rng) {
  if (samples < 2) throw SolverError("sample_times: need at least 2 samples");
  std::uniform_real_distribution<double> uniform(0.0, horizon);
  Vec t(samples + 1);
  t(0) = 0.0;
  t(samples) = horizon;
  for (int i = 1; i < samples; ++i) t(i) = uniform(rng);
  std::sort(t.data() + 1, t.data() + samples);
  return t;
}

Bracket bracket(const LatentTrajectory& latent, double t) {
  const double horizon = latent.horizon();
  if (!(t >= 0.0 && t <= horizon)) {
    std::ostringstream msg;
    msg << "time " << t << " outside the latent grid [0, " << horizon << "]";
    throw SolverError(msg.str());
  }
  const Eigen::Index steps = latent.steps();
  const double dt = latent.step();
  auto k = static_cast<Eigen::Index>(std::floor(t / dt));
  k = std::clamp<Eigen::Index>(k, 0, steps - 1);
  const double w = std::clamp((t - latent.times(k)) / (latent.times(k + 1) - latent.times(k)), 0.0, 1.0);
  return {k, w};
}

namespace {

// Blended value and total time derivative from the two bracketing nodes.
struct Blend {
  Vec X;
  Vec Xdot;
};

Blend blend(const TlSympNet::Output& a, const TlSympNet::Output& b, double w) {
  return {(1.0 - w) * a.value + w * b.value, (1.0 - w) * (a.jvp + a.rate) + w * (b.jvp + b.rate)};
}

LossGradient evaluate_loss(const TlSympNet& net, const ProblemSpec& problem, const LatentTrajectory& latent,
                           const Vec& times, LossNorm norm, bool with_gradient) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = problem.dim();
  if (latent.half_dim() != n || net.half_dim() != n)
    throw SolverError("physics_loss: network, latent system and problem dimensions differ");
  const double scale = norm == LossNorm::squared_mean ? 1.0 / static_cast<double>(times.size()) : 1.0;

  SympNetTape tape(net);
  LossGradient out;
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    const auto [k, w] = bracket(latent, times(i));
    const auto tid = tape.add_time(times(i));
    const auto pa = tape.add_point(tid, latent.phase(k), latent.velocity(k));
    const auto pb = tape.add_point(tid, latent.phase(k + 1), latent.velocity(k + 1));
    const Blend z = blend(tape.output(pa), tape.output(pb), w);
    const Vec x = z.X.head(n);
    const Vec p = z.X.tail(n);
    Vec gx, gp;
    hamiltonian_gradient<double>(problem, x, p, gx, gp);
    const Vec r1 = z.Xdot.head(n) - gp;
    const Vec r2 = z.Xdot.tail(n) + gx;
    const double n1 = r1.norm();
    const double n2 = r2.norm();

    out.report.state_residual += n1;
    out.report.costate_residual += n2;
    Vec g1, g2;
    if (norm == LossNorm::euclidean) {
      out.report.objective += n1 + n2;
      g1 = n1 > 0.0 ? Vec(r1 / n1) : Vec::Zero(n);
      g2 = n2 > 0.0 ? Vec(r2 / n2) : Vec::Zero(n);
    } else {
      out.report.objective += scale * (n1 * n1 + n2 * n2);
      g1 = 2.0 * scale * r1;
      g2 = 2.0 * scale * r2;
    }
    if (!with_gradient) continue;

    Vec xdot_adj(2 * n);
    xdot_adj << g1, g2;
    // d/dX of -<g1, dH/dp> + <g2, dH/dx> is the Hessian applied to (g2, -g1).
    const Vec x_adj = hamiltonian_hvp(problem, x, p, g2, -g1);
    tape.seed(pa, (1.0 - w) * x_adj, (1.0 - w) * xdot_adj, (1.0 - w) * xdot_adj);
    tape.seed(pb, w * x_adj, w * xdot_adj, w * xdot_adj);
  }
  out.report.total = out.report.state_residual + out.report.costate_residual;
  if (with_gradient) out.gradient = tape.gradient().flatten();
  out.report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

Vec interpolated_phase(const TlSympNet& net, const LatentTrajectory& latent, double t) {
  const auto [k, w] = bracket(latent, t);
  const auto coeffs = net.coefficients(t);
  const Vec zero = Vec::Zero(2 * latent.half_dim());
  const Vec a = net.propagate(coeffs, latent.phase(k), zero).value;
  const Vec b = net.propagate(coeffs, latent.phase(k + 1), zero).value;
  return (1.0 - w) * a + w * b;
}

Vec phase_derivative(const TlSympNet& net, const LatentTrajectory& latent, double t) {
  const auto [k, w] = bracket(latent, t);
  const auto coeffs = net.coefficients(t);
  const auto a = net.propagate(coeffs, latent.phase(k), latent.velocity(k));
  const auto b = net.propagate(coeffs, latent.phase(k + 1), latent.velocity(k + 1));
  return blend(a, b, w).Xdot;
}

LossReport physics_loss(const TlSympNet& net, const ProblemSpec& problem, const LatentTrajectory& latent,
                        const Vec& times, LossNorm norm) {
  return evaluate_loss(net, problem, latent, times, norm, false).report;
}

LossGradient loss_and_gradient(const TlSympNet& net, const ProblemSpec& problem,
                               const LatentTrajectory& latent, const Vec& times, LossNorm norm) {
  return evaluate_loss(net, problem, latent, times, norm, true);
}

TlSympNet make_network(const NetConfig& config, int half_dim, double horizon, std::uint64_t seed) {
  TlSympNet::Config c;
  c.half_dim = half_dim;
  c.horizon = horizon;
  c.pairs = config.pairs;
  c.width = config.width;
  c.sublayers = config.sublayers;
  c.subwidth = config.subwidth;
  c.activation = config.activation;
  c.order = config.order;
  c.boundary_preserving = true;
  std::mt19937_64 rng(seed);
  return TlSympNet::make(c, rng);
}

PhaseTrajectory rollout(const TlSympNet& net, const ProblemSpec& problem, const LatentTrajectory& latent) {
  const Eigen::Index n = problem.dim();
  const Eigen::Index nodes = latent.nodes();
  PhaseTrajectory out;
  out.times = latent.times;
  out.x.resize(nodes, n);
  out.p.resize(nodes, n);
  out.xdot.resize(nodes, n);
  out.pdot.resize(nodes, n);
  out.u.resize(nodes, problem.control_size());
  for (Eigen::Index k = 0; k < nodes; ++k) {
    const auto o = net.propagate(net.coefficients(latent.times(k)), latent.phase(k), latent.velocity(k));
    out.x.row(k) = o.value.head(n).transpose();
    out.p.row(k) = o.value.tail(n).transpose();
    const Vec d = o.jvp + o.rate;
    out.xdot.row(k) = d.head(n).transpose();
    out.pdot.row(k) = d.tail(n).transpose();
    out.u.row(k) = recover_control(problem, o.value.tail(n)).transpose();
  }
  return out;
}

double violation_metric(const PhaseTrajectory& trajectory, const ProblemSpec& problem) {
  double best = std::numeric_limits<double>::infinity();
  if (problem.agents < 2) return best;
  const double cd = problem.geometry ? problem.geometry->agent_radius : 0.0;
  const int d = problem.space_dim;
  for (Eigen::Index k = 0; k < trajectory.x.rows(); ++k) {
    const Vec w = problem.positions(trajectory.x.row(k).transpose());
    for (int j = 1; j < problem.agents; ++j)
      for (int i = 0; i < j; ++i)
        best = std::min(best, (w.segment(i * d, d) - w.segment(j * d, d)).norm() - 2.0 * cd);
  }
  return best;
}

double min_clearance(const PhaseTrajectory& trajectory, const ProblemSpec& problem) {
  double best = std::numeric_limits<double>::infinity();
  if (!problem.geometry || problem.geometry->obstacle_rows() == 0) return best;
  for (Eigen::Index k = 0; k < trajectory.x.rows(); ++k) {
    const Vec h = h1(*problem.geometry, problem.positions(trajectory.x.row(k).transpose()));
    best = std::min(best, h.minCoeff());
  }
  return best;
}

TrainResult train(const ProblemSpec& problem, const TrainConfig& config, const TlSympNet* init,
                  const TrainObserver& observer) {
  config.validate();
  problem.validate();
  TrainResult result;
  result.latent = solve_latent(problem, config.grid_steps);
  if (init) {
    if (init->half_dim() != problem.dim() || init->horizon() != problem.horizon)
      throw SolverError("train: initial network does not match the problem dimension or horizon");
    result.net = *init;
  } else {
    result.net = make_network(config.net, problem.dim(), problem.horizon, config.seed);
  }
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const bool constrained = problem.geometry && problem.geometry->rows() > 0;
  const int stages = constrained ? config.schedule.stages : 1;
  PenaltyParams params = constrained ? config.schedule.initial() : problem.penalty;
  ProblemSpec staged = problem;
  Vec theta = result.net.flatten();
  const auto start = std::chrono::steady_clock::now();
  int global = 0;
  bool stopped = false;

  for (int stage = 0; stage < stages && !stopped; ++stage) {
    staged.penalty = params;
    Adam adam(theta.size(), config.adam);
    StageRecord record{stage, params, 0, std::numeric_limits<double>::infinity(), false};
    Vec best_theta = theta;
    for (int it = 0; it < config.max_iterations; ++it) {
      const Vec times = sample_times(config.samples, problem.horizon, rng);
      result.net.unflatten(theta);
      const auto lg = loss_and_gradient(result.net, staged, result.latent, times, config.norm);
      const double loss = lg.report.total;
      if (!std::isfinite(loss) || !std::isfinite(lg.report.objective)) throw SolverError("train: loss became non-finite");
      ++record.iterations;
      const HistoryRow row{global++, stage, params.eps, params.l, loss,
                           std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                               .count()};
      result.history.push_back(row);
      if (loss < record.best_loss) {
        record.best_loss = loss;
        best_theta = theta;
      }
      if (loss < config.loss_threshold) {
        record.converged = true;
        break;
      }
      if (observer && !observer(row)) {
        stopped = true;
        break;
      }
      if (it + 1 < config.max_iterations) adam.step(theta, lg.gradient);
    }
    theta = best_theta;
    result.final_loss = record.best_loss;
    result.stages.push_back(record);
    result.penalty = params;
    if (stage + 1 < stages && !stopped) params = schedule_step(params, config.schedule);
  }

  result.net.unflatten(theta);
  staged.penalty = result.penalty;
  result.trajectory = rollout(result.net, staged, result.latent);
  // Earlier stages are continuation steps; the answer is the last stage's.
  result.converged = !stopped && !result.stages.empty() && result.stages.back().converged &&
                     static_cast<int>(result.stages.size()) == stages;
  return result;
}

ProblemSpec simpler_problem(const ProblemSpec& problem) {
  ProblemSpec simple;
  const int d = problem.space_dim;
  simple.agents = problem.agents;
  simple.state_dim = d;
  simple.control_dim = d;
  simple.space_dim = d;
  simple.horizon = problem.horizon;
  simple.x0 = problem.positions(problem.x0);
  simple.xT = problem.positions(problem.xT);
  for (int i = 0; i < problem.agents; ++i) {
    simple.dynamics.push_back(SubsystemDynamics::single_integrator(d));
    simple.costs.push_back(QuadraticCost::make(Mat::Zero(d, d), Mat::Identity(d, d)));
  }
  simple.geometry = problem.geometry;
  simple.penalty = problem.penalty;
  return simple;
}

namespace {

// Replace the velocity block of every Newtonian agent with `v`.
Vec with_velocities(const ProblemSpec& problem, const Vec& x, const Vec& v) {
  Vec out = x;
  const int d = problem.space_dim;
  for (int i = 0; i < problem.agents; ++i) {
    if (problem.dynamics[i].kind != DynamicsKind::newtonian_drag) continue;
    out.segment(i * problem.state_dim + d, d) = v.segment(i * d, d);
  }
  return out;
}

void append(TrainResult& into, TrainResult&& stage, int offset) {
  for (auto row : stage.history) {
    row.iteration += offset;
    into.history.push_back(row);
  }
  for (const auto& rec : stage.stages) into.stages.push_back(rec);
}

}  // namespace

TrainResult warmup_train(const ProblemSpec& problem, const TrainConfig& config,
                         const std::optional<WarmupBoundary>& boundary, const TrainObserver& observer) {
  config.validate();
  problem.validate();
  if (config.warmup_stages == 0) return train(problem, config, nullptr, observer);

  TrainResult merged;
  bool converged = true;
  WarmupBoundary tilde;
  if (boundary) {
    tilde = *boundary;
    if (tilde.x0.size() != problem.dim() || tilde.xT.size() != problem.dim())
      throw SolverError("warmup_train: boundary data has the wrong dimension");
  } else {
    const ProblemSpec simple = simpler_problem(problem);
    TrainResult first = train(simple, config, nullptr, observer);
    converged = first.converged;
    const auto& u = first.trajectory.u;
    tilde.x0 = with_velocities(problem, problem.x0, u.row(0).transpose());
    tilde.xT = with_velocities(problem, problem.xT, u.row(u.rows() - 1).transpose());
    append(merged, std::move(first), 0);
  }

  const int stages = config.warmup_stages;
  std::optional<TlSympNet> net;
  TrainResult last;
  for (int i = 1; i <= stages; ++i) {
    ProblemSpec staged = problem;
    const double a = static_cast<double>(i) / stages;
    if (i == stages) {
      staged.x0 = problem.x0;
      staged.xT = problem.xT;
    } else {
      staged.x0 = a * problem.x0 + (1.0 - a) * tilde.x0;
      staged.xT = a * problem.xT + (1.0 - a) * tilde.xT;
    }
    last = train(staged, config, net ? &*net : nullptr, observer);
    converged = converged && last.converged;
    net = last.net;
    const int offset = merged.history.empty() ? 0 : merged.history.back().iteration + 1;
    TrainResult copy = last;
    append(merged, std::move(copy), offset);
  }
  last.history = std::move(merged.history);
  last.stages = std::move(merged.stages);
  last.converged = converged;
  return last;
}

}  // namespace tsymp
