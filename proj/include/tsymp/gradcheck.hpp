#pragma once

#include "tsymp/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tsymp {

/// |a - f| <= rtol * max(|a|, |f|, floor) componentwise; returns the worst
/// ratio |a - f| / max(|a|, |f|, floor), so the check passes when <= rtol.
double fd_relative_error(const Vec& analytic, const Vec& fd, double floor);

struct GradcheckOptions {
  int points = 100;          // random points for the H, net and penalty suites
  int coords_per_point = 24; // FD directions per point for large problems
  int loss_samples = 5;      // N-tilde for the full-loss suite
  int param_coords = 64;     // parameter coordinates probed in the full-loss suite
  std::uint64_t seed = 1;
};

struct SuiteResult {
  std::string name;
  int checks = 0;
  double worst = 0.0;  // largest relative error seen
  double tolerance = 0.0;
  bool passed() const { return worst <= tolerance; }
};

struct GradcheckReport {
  std::string scenario;
  std::vector<SuiteResult> suites;
  bool passed() const;
};

/// Runs grad_p_H, grad_x_H, jacobian_vp, time_derivative, param_gradient
/// and penalty_gradient against central differences on the scenario's
/// problem. Suites that do not apply (no constraints) report zero checks.
GradcheckReport run_gradcheck(const ScenarioConfig& scenario, const GradcheckOptions& options = {});

}  // namespace tsymp
