#include "tsymp/penalty.hpp"

namespace tsymp {

void PenaltyParams::validate() const {
  if (!(eps > 0.0) || !(l > 0.0) || !std::isfinite(eps) || !std::isfinite(l))
    throw SolverError("penalty parameters must be finite and positive");
}

void PenaltySchedule::validate() const {
  PenaltyParams{eps0, l0}.validate();
  if (!(n1 > 0.0 && n1 < 1.0) || !(n2 > 0.0 && n2 < 1.0))
    throw SolverError("penalty decay factors must lie in (0, 1)");
  if (stages < 1) throw SolverError("penalty schedule needs at least one stage");
}

PenaltyParams PenaltySchedule::final() const {
  PenaltyParams p = initial();
  for (int s = 1; s < stages; ++s) p = schedule_step(p, *this);
  return p;
}

PenaltyMax penalty_max(std::span<const double> h, const PenaltyParams& params) {
  if (h.empty()) throw SolverError("penalty_max: empty constraint vector");
  PenaltyMax best{penalty_scalar(h[0], params), 0};
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double u = penalty_scalar(h[i], params);
    if (u > best.value) best = {u, i};
  }
  return best;
}

Vec penalty_gradient(const Vec& h, const Mat& dh, const PenaltyParams& params) {
  if (dh.rows() != h.size()) throw SolverError("penalty_gradient: jacobian row count mismatch");
  const auto active = penalty_max({h.data(), static_cast<std::size_t>(h.size())}, params);
  const auto i = static_cast<Eigen::Index>(active.index);
  return penalty_derivative(h(i), params) * dh.row(i).transpose();
}

PenaltyParams schedule_step(const PenaltyParams& params, const PenaltySchedule& sched) {
  return {sched.n1 * params.eps, sched.n2 * params.l};
}

}  // namespace tsymp
