#pragma once

#include "tsymp/types.hpp"

#include <cmath>
#include <cstddef>
#include <span>

namespace tsymp {

/// Barrier parameters (epsilon, l) of the soft log penalty.
struct PenaltyParams {
  double eps = 0.1;
  double l = 0.1;

  void validate() const;
};

/// Geometric decay of (epsilon, l) across outer training stages.
struct PenaltySchedule {
  double eps0 = 0.1;
  double l0 = 0.1;
  double n1 = 0.5;
  double n2 = 0.4;
  int stages = 5;

  void validate() const;
  PenaltyParams initial() const { return {eps0, l0}; }
  /// Parameters of the last stage.
  PenaltyParams final() const;
};

// Log barrier for h > l, quadratic extension below l. The extension is
// anchored at log(l) so the function is C^1 and finite for every real h.
template <class S>
S penalty_scalar(const S& h, const PenaltyParams& params) {
  using std::log;
  if (h > params.l) return -params.eps * log(h);
  const S r = (h - 2.0 * params.l) / params.l;
  return -params.eps * std::log(params.l) + 0.5 * params.eps * (r * r - 1.0);
}

template <class S>
S penalty_derivative(const S& h, const PenaltyParams& params) {
  if (h > params.l) return -params.eps / h;
  return params.eps * (h - 2.0 * params.l) / (params.l * params.l);
}

struct PenaltyMax {
  double value;
  std::size_t index;
};

/// Max of the scalar penalty over components; ties go to the lowest index.
/// `h` must be non-empty.
PenaltyMax penalty_max(std::span<const double> h, const PenaltyParams& params);

/// Subgradient of the max penalty through the active component only:
/// U'(h_i*) * grad h_i*. `dh` has one row per component.
Vec penalty_gradient(const Vec& h, const Mat& dh, const PenaltyParams& params);

PenaltyParams schedule_step(const PenaltyParams& params, const PenaltySchedule& sched);

}  // namespace tsymp
