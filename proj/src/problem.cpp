#include "tsymp/problem.hpp"

#include "tsymp/autodiff.hpp"

#include <cmath>

namespace tsymp {

SubsystemDynamics SubsystemDynamics::single_integrator(int dim) {
  return {DynamicsKind::single_integrator, 0.0, 0.0, Mat::Identity(dim, dim)};
}

SubsystemDynamics SubsystemDynamics::newtonian(int space_dim, double drag, double smoothing) {
  Mat B = Mat::Zero(2 * space_dim, space_dim);
  B.bottomRows(space_dim).setIdentity();
  return {DynamicsKind::newtonian_drag, drag, smoothing, B};
}

QuadraticCost QuadraticCost::make(Mat state_weight, Mat control_weight) {
  if (state_weight.rows() != state_weight.cols() || control_weight.rows() != control_weight.cols())
    throw SolverError("cost weights must be square");
  if (!state_weight.isApprox(state_weight.transpose(), 1e-12) ||
      !control_weight.isApprox(control_weight.transpose(), 1e-12))
    throw SolverError("cost weights must be symmetric");
  Eigen::LLT<Mat> llt(control_weight);
  if (llt.info() != Eigen::Success)
    throw SolverError("control weight S is not positive definite (G must be strongly convex)");
  Mat inverse = llt.solve(Mat::Identity(control_weight.rows(), control_weight.cols()));
  return {std::move(state_weight), std::move(control_weight), std::move(inverse)};
}

void ProblemSpec::validate() const {
  if (agents < 1 || state_dim < 1 || control_dim < 1 || space_dim < 1)
    throw SolverError("problem: dimensions must be positive");
  if (!(horizon > 0.0)) throw SolverError("problem: horizon must be positive");
  if (x0.size() != dim() || xT.size() != dim())
    throw SolverError("problem: boundary states must have agents*state_dim entries");
  if (static_cast<int>(dynamics.size()) != agents || static_cast<int>(costs.size()) != agents)
    throw SolverError("problem: need one dynamics and one cost entry per subsystem");
  for (const auto& d : dynamics) {
    if (d.B.rows() != state_dim || d.B.cols() != control_dim)
      throw SolverError("problem: B has the wrong shape");
    if (d.kind == DynamicsKind::newtonian_drag) {
      if (state_dim != 2 * space_dim) throw SolverError("problem: drag dynamics need d_x = 2*dim");
      if (d.drag < 0.0 || !(d.smoothing > 0.0))
        throw SolverError("problem: drag needs k >= 0 and smoothing > 0");
    } else if (state_dim != space_dim) {
      throw SolverError("problem: single-integrator state must be the position");
    }
  }
  for (const auto& c : costs)
    if (c.state_weight.rows() != state_dim || c.control_weight.rows() != control_dim)
      throw SolverError("problem: cost weight shape mismatch");
  if (geometry) {
    geometry->validate();
    if (geometry->agents != agents || geometry->space_dim != space_dim)
      throw SolverError("problem: geometry does not match agent count or space dimension");
  }
  penalty.validate();
}

Vec ProblemSpec::positions(const Vec& x) const {
  Vec w(agents * space_dim);
  for (int i = 0; i < agents; ++i) w.segment(i * space_dim, space_dim) = x.segment(i * state_dim, space_dim);
  return w;
}

namespace {

template <class S>
S smoothed_speed(const VecT<S>& v, double delta, S* raw = nullptr) {
  using std::sqrt;
  S sq(0.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) sq += v(i) * v(i);
  const S root = sqrt(sq + delta * delta);
  if (raw) *raw = root;
  return root - delta;
}

template <class S>
VecT<S> drift(const SubsystemDynamics& dyn, const VecT<S>& xi) {
  VecT<S> out = VecT<S>::Zero(xi.size());
  if (dyn.kind == DynamicsKind::single_integrator) return out;
  const auto d = xi.size() / 2;
  const VecT<S> v = xi.tail(d);
  out.head(d) = v;
  if (dyn.drag != 0.0) {
    const S coef = -dyn.drag * smoothed_speed(v, dyn.smoothing);
    out.tail(d) = coef * v;
  }
  return out;
}

// (df/dx)^T p for one subsystem.
template <class S>
VecT<S> drift_adjoint(const SubsystemDynamics& dyn, const VecT<S>& xi, const VecT<S>& pi) {
  VecT<S> out = VecT<S>::Zero(xi.size());
  if (dyn.kind == DynamicsKind::single_integrator) return out;
  const auto d = xi.size() / 2;
  const VecT<S> v = xi.tail(d);
  const VecT<S> pv = pi.tail(d);
  out.tail(d) = pi.head(d);
  if (dyn.drag != 0.0) {
    S root(0.0);
    const S s = smoothed_speed(v, dyn.smoothing, &root);
    const S along = dyn.drag * v.dot(pv) / root;
    const S scaled = dyn.drag * s;
    out.tail(d) -= scaled * pv + along * v;
  }
  return out;
}

template <class S>
VecT<S> positions_of(const ProblemSpec& spec, const VecT<S>& x) {
  VecT<S> w(spec.agents * spec.space_dim);
  for (int i = 0; i < spec.agents; ++i)
    w.segment(i * spec.space_dim, spec.space_dim) = x.segment(i * spec.state_dim, spec.space_dim);
  return w;
}

}  // namespace

Vec dynamics_f(const ProblemSpec& spec, const Vec& x) {
  Vec out(spec.dim());
  for (int i = 0; i < spec.agents; ++i)
    out.segment(i * spec.state_dim, spec.state_dim) =
        drift<double>(spec.dynamics[i], x.segment(i * spec.state_dim, spec.state_dim));
  return out;
}

double hamiltonian(const ProblemSpec& spec, const Vec& x, const Vec& p) {
  double h = 0.0;
  const int n = spec.state_dim;
  for (int i = 0; i < spec.agents; ++i) {
    const Vec xi = x.segment(i * n, n);
    const Vec pi = p.segment(i * n, n);
    const auto& dyn = spec.dynamics[i];
    const auto& cost = spec.costs[i];
    const Vec z = dyn.B.transpose() * pi;
    h += pi.dot(drift<double>(dyn, xi)) - 0.5 * xi.dot(cost.state_weight * xi) +
         0.5 * z.dot(cost.control_inverse * z);
  }
  if (spec.geometry && spec.geometry->rows() > 0) {
    const Vec hv = constraint_values(*spec.geometry, spec.positions(x));
    h -= penalty_max({hv.data(), static_cast<std::size_t>(hv.size())}, spec.penalty).value;
  }
  return h;
}

template <class S>
void hamiltonian_gradient(const ProblemSpec& spec, const VecT<S>& x, const VecT<S>& p,
                          VecT<S>& gx, VecT<S>& gp) {
  const int n = spec.state_dim;
  gx.resize(spec.dim());
  gp.resize(spec.dim());
  for (int i = 0; i < spec.agents; ++i) {
    const VecT<S> xi = x.segment(i * n, n);
    const VecT<S> pi = p.segment(i * n, n);
    const auto& dyn = spec.dynamics[i];
    const auto& cost = spec.costs[i];
    const Mat gain = dyn.B * cost.control_inverse * dyn.B.transpose();
    gp.segment(i * n, n) = drift<S>(dyn, xi) + gain.cast<S>() * pi;
    gx.segment(i * n, n) = drift_adjoint<S>(dyn, xi, pi) - cost.state_weight.cast<S>() * xi;
  }
  if (!spec.geometry || spec.geometry->rows() == 0) return;

  const auto& geom = *spec.geometry;
  const VecT<S> w = positions_of<S>(spec, x);
  Vec w_value(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) w_value(k) = value_of(w(k));
  const Vec hv = constraint_values(geom, w_value);
  const auto active = penalty_max({hv.data(), static_cast<std::size_t>(hv.size())}, spec.penalty);

  int a = -1, b = -1;
  VecT<S> ga(spec.space_dim), gb(spec.space_dim);
  const S h_active = constraint_row<S>(geom, w, static_cast<int>(active.index), a, b, ga, gb);
  const S slope = penalty_derivative<S>(h_active, spec.penalty);
  gx.segment(a * n, spec.space_dim) -= slope * ga;
  if (b >= 0) gx.segment(b * n, spec.space_dim) -= slope * gb;
}

template void hamiltonian_gradient<double>(const ProblemSpec&, const Vec&, const Vec&, Vec&, Vec&);
template void hamiltonian_gradient<Dual>(const ProblemSpec&, const VecT<Dual>&,
                                         const VecT<Dual>&, VecT<Dual>&, VecT<Dual>&);

Vec grad_p_H(const ProblemSpec& spec, const Vec& x, const Vec& p) {
  Vec gx, gp;
  hamiltonian_gradient<double>(spec, x, p, gx, gp);
  return gp;
}

Vec grad_x_H(const ProblemSpec& spec, const Vec& x, const Vec& p) {
  Vec gx, gp;
  hamiltonian_gradient<double>(spec, x, p, gx, gp);
  return gx;
}

Vec hamiltonian_hvp(const ProblemSpec& spec, const Vec& x, const Vec& p, const Vec& dx,
                    const Vec& dp) {
  const auto n = x.size();
  VecT<Dual> xd(n), pd(n), gx, gp;
  for (Eigen::Index i = 0; i < n; ++i) {
    xd(i) = make_dual(x(i), dx(i));
    pd(i) = make_dual(p(i), dp(i));
  }
  hamiltonian_gradient<Dual>(spec, xd, pd, gx, gp);
  Vec out(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = tangent_of(gx(i));
    out(n + i) = tangent_of(gp(i));
  }
  return out;
}

Vec recover_control(const ProblemSpec& spec, const Vec& p) {
  Vec u(spec.control_size());
  const int n = spec.state_dim, m = spec.control_dim;
  for (int i = 0; i < spec.agents; ++i)
    u.segment(i * m, m) =
        spec.costs[i].control_inverse * spec.dynamics[i].B.transpose() * p.segment(i * n, n);
  return u;
}

double running_cost(const ProblemSpec& spec, const Vec& times, const Mat& states,
                    const Mat& controls) {
  if (states.rows() != times.size() || controls.rows() != times.size())
    throw SolverError("running_cost: row count must match the time grid");
  const int n = spec.state_dim, m = spec.control_dim;
  auto lagrangian = [&](Eigen::Index k) {
    double total = 0.0;
    for (int i = 0; i < spec.agents; ++i) {
      const Vec xi = states.row(k).segment(i * n, n).transpose();
      const Vec ui = controls.row(k).segment(i * m, m).transpose();
      total += 0.5 * xi.dot(spec.costs[i].state_weight * xi) +
               0.5 * ui.dot(spec.costs[i].control_weight * ui);
    }
    return total;
  };
  double integral = 0.0;
  double prev = times.size() > 0 ? lagrangian(0) : 0.0;
  for (Eigen::Index k = 1; k < times.size(); ++k) {
    const double cur = lagrangian(k);
    integral += 0.5 * (times(k) - times(k - 1)) * (prev + cur);
    prev = cur;
  }
  return integral;
}

}  // namespace tsymp
