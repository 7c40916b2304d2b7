#include "tsymp/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tsymp {

double fd_relative_error(const Vec& analytic, const Vec& fd, double floor) {
  if (analytic.size() != fd.size()) throw SolverError("fd_relative_error: size mismatch");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double scale = std::max({std::abs(analytic(i)), std::abs(fd(i)), floor});
    const double err = std::abs(analytic(i) - fd(i));
    if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
    if (scale > 0.0) worst = std::max(worst, err / scale);
  }
  return worst;
}

bool GradcheckReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

namespace {

// Entries below this fraction of the largest one are compared absolutely.
constexpr double kFloorFraction = 1e-3;

double floor_for(const Vec& a, const Vec& f) {
  return kFloorFraction * std::max(a.lpNorm<Eigen::Infinity>(), f.lpNorm<Eigen::Infinity>()) + 1e-14;
}

Vec normal(Eigen::Index n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, sigma);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

std::vector<Eigen::Index> pick(Eigen::Index n, int count, std::mt19937_64& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (count >= n) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Five-point central stencil; the barrier's high derivatives near small l
// make the three-point rule too coarse for a 1e-6 comparison.
template <class F>
Vec central(F&& f, Vec x, const std::vector<Eigen::Index>& coords, double step) {
  Vec out(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t j = 0; j < coords.size(); ++j) {
    const Eigen::Index c = coords[j];
    const double x0 = x(c);
    const double h = step * (1.0 + std::abs(x0));
    auto at = [&](double offset) {
      x(c) = x0 + offset;
      return f(x);
    };
    const double d = 8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h));
    x(c) = x0;
    out(static_cast<Eigen::Index>(j)) = d / (12.0 * h);
  }
  return out;
}

template <class F>
Vec central_vec(F&& f, double h) {
  return (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h);
}

Vec gather(const Vec& v, const std::vector<Eigen::Index>& coords) {
  Vec out(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t j = 0; j < coords.size(); ++j) out(static_cast<Eigen::Index>(j)) = v(coords[j]);
  return out;
}

// A state near the straight boundary-to-boundary path, so that constraint
// values span both sides of l.
Vec random_state(const ProblemSpec& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double s = u(rng);
  Vec x = (1.0 - s) * p.x0 + s * p.xT;
  const double spread = std::max(0.1, 0.05 * (p.xT - p.x0).lpNorm<Eigen::Infinity>());
  x += normal(x.size(), spread, rng);
  return x;
}

// Perturbs every parameter so that no layer is the identity.
TlSympNet random_net(const NetConfig& config, int half_dim, double horizon, std::mt19937_64& rng) {
  TlSympNet net = make_network(config, half_dim, horizon, rng());
  Vec theta = net.flatten();
  theta += normal(theta.size(), 0.1, rng);
  net.unflatten(theta);
  return net;
}

// True when the max-penalty is smooth on a stencil of radius `reach` around
// w: the active component is clear of the runner-up and of the h = l seam.
bool smooth_at(const SwarmGeometry& g, const Vec& w, const PenaltyParams& params, double reach) {
  const Vec h = constraint_values(g, w);
  const auto best = penalty_max({h.data(), static_cast<std::size_t>(h.size())}, params);
  const auto i = static_cast<Eigen::Index>(best.index);
  // Constraint rows are 1-Lipschitz in one position coordinate.
  const double slope = std::abs(penalty_derivative(h(i), params));
  if (std::abs(h(i) - params.l) < 4.0 * reach) return false;
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    if (j == i) continue;
    const double gap = best.value - penalty_scalar(h(j), params);
    const double move = (slope + std::abs(penalty_derivative(h(j), params))) * reach;
    if (gap < 4.0 * move) return false;
  }
  return true;
}

void record(SuiteResult& suite, double err) {
  ++suite.checks;
  suite.worst = std::max(suite.worst, err);
}

}  // namespace

GradcheckReport run_gradcheck(const ScenarioConfig& scenario, const GradcheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  const ProblemSpec& base = scenario.problem;
  const int n = base.dim();
  const double h_step = 1e-5;

  ProblemSpec early = base, late = base;
  early.penalty = scenario.train.schedule.initial();
  late.penalty = scenario.train.schedule.final();

  SuiteResult gp{"grad_p_H", 0, 0.0, 1e-6};
  SuiteResult gx{"grad_x_H", 0, 0.0, 1e-6};
  SuiteResult pen{"penalty_gradient", 0, 0.0, 1e-6};
  for (int k = 0; k < options.points; ++k) {
    const ProblemSpec& p = (k % 2 == 0) ? early : late;
    Vec x = random_state(p, rng);
    if (p.geometry && p.geometry->rows() > 0) {
      const double reach = 2.0 * h_step * (1.0 + x.lpNorm<Eigen::Infinity>());
      int tries = 0;
      while (!smooth_at(*p.geometry, p.positions(x), p.penalty, reach)) {
        if (++tries > 1000) throw SolverError("gradcheck: no smooth sample point found");
        x = random_state(p, rng);
      }
    }
    const Vec costate = normal(n, 1.0, rng);
    const auto coords = pick(n, options.coords_per_point, rng);

    const Vec ap = gather(grad_p_H(p, x, costate), coords);
    // Quadratic in p: a wide step only reduces rounding.
    const Vec fp = central([&](const Vec& q) { return hamiltonian(p, x, q); }, costate, coords, 1e-2);
    record(gp, fd_relative_error(ap, fp, floor_for(ap, fp)));

    const Vec ax = gather(grad_x_H(p, x, costate), coords);
    const Vec fx = central([&](const Vec& y) { return hamiltonian(p, y, costate); }, x, coords, h_step);
    record(gx, fd_relative_error(ax, fx, floor_for(ax, fx)));

    if (p.geometry && p.geometry->rows() > 0) {
      const SwarmGeometry& g = *p.geometry;
      const Vec w = p.positions(x);
      const Vec hv = constraint_values(g, w);
      const Mat dh = Mat(constraint_jacobian(g, w));
      const auto wc = pick(w.size(), options.coords_per_point, rng);
      const Vec a = gather(penalty_gradient(hv, dh, p.penalty), wc);
      const Vec f = central(
          [&](const Vec& y) {
            const Vec c = constraint_values(g, y);
            return penalty_max({c.data(), static_cast<std::size_t>(c.size())}, p.penalty).value;
          },
          w, wc, h_step);
      record(pen, fd_relative_error(a, f, floor_for(a, f)));
    }
  }

  // Net suites: the map is affine in z, so these mostly probe the layer
  // bookkeeping and the time derivative of the coefficient nets.
  SuiteResult jv{"jacobian_vp", 0, 0.0, 1e-6};
  SuiteResult td{"time_derivative", 0, 0.0, 1e-6};
  NetConfig small = scenario.train.net;
  const double T = base.horizon;
  std::uniform_real_distribution<double> ut(0.05 * T, 0.95 * T);
  TlSympNet net = random_net(small, n, T, rng);
  for (int k = 0; k < options.points; ++k) {
    const Vec z = normal(2 * n, 1.0, rng);
    const Vec v = normal(2 * n, 1.0, rng);
    const double t = ut(rng);
    const Vec a = net.jacobian_vp(z, t, v);
    // Affine in z, so a large step loses nothing to truncation.
    const Vec f = central_vec([&](double e) { return net.forward(z + e * v, t); }, 1e-2);
    record(jv, fd_relative_error(a, f, floor_for(a, f)));

    const Vec at = net.time_derivative(z, t);
    const Vec ft = central_vec([&](double e) { return net.forward(z, t + e); }, 1e-4 * T);
    record(td, fd_relative_error(at, ft, floor_for(at, ft)));
  }

  // Full physics-informed loss against its parameter gradient on a
  // two-layer net.
  SuiteResult pg{"param_gradient", 0, 0.0, 1e-4};
  {
    NetConfig two = small;
    two.pairs = 1;
    const TlSympNet tnet = random_net(two, n, T, rng);
    const LatentTrajectory latent = solve_latent(base, scenario.train.grid_steps);
    const Vec times = sample_times(options.loss_samples, T, rng);
    const ProblemSpec& p = early;
    const auto lg = loss_and_gradient(tnet, p, latent, times, scenario.train.norm);
    const Vec theta = tnet.flatten();
    const auto coords = pick(theta.size(), options.param_coords, rng);
    TlSympNet probe = tnet;
    const Vec f = central(
        [&](const Vec& th) {
          probe.unflatten(th);
          return physics_loss(probe, p, latent, times, scenario.train.norm).objective;
        },
        theta, coords, 1e-6);
    const Vec a = gather(lg.gradient, coords);
    pg.checks = static_cast<int>(coords.size());
    pg.worst = fd_relative_error(a, f, floor_for(a, f));
  }

  GradcheckReport report;
  report.scenario = scenario.kind;
  report.suites = {gp, gx, jv, td, pg, pen};
  return report;
}

}  // namespace tsymp
