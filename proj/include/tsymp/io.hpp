#pragma once

#include "tsymp/problem.hpp"
#include "tsymp/trainer.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tsymp {

/// Columns: t, x (agent-major), p, u. Values use %.17g.
void write_trajectory_csv(std::ostream& out, const PhaseTrajectory& trajectory);
void write_trajectory_csv(const std::string& path, const PhaseTrajectory& trajectory);

/// Reads x, p, u back; xdot and pdot are left empty. Column counts are
/// checked against the problem.
PhaseTrajectory read_trajectory_csv(const std::string& path, const ProblemSpec& problem);

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history);

struct MetricsReport {
  double running_cost = 0.0;
  double violation = 0.0;      // +inf without agent pairs
  double min_clearance = 0.0;  // +inf without obstacles
  std::optional<double> velocity_alignment;  // Newtonian agents only
  std::optional<double> final_loss;
  std::optional<bool> converged;
  double wall_time_s = 0.0;
  std::vector<StageRecord> stages;
  std::uint64_t seed = 0;
};

/// Quantities that only need the trajectory.
MetricsReport trajectory_metrics(const PhaseTrajectory& trajectory, const ProblemSpec& problem);

/// Time average over the grid of <u, v> / (|u| |v|), pooled over agents.
/// Nodes where either vector vanishes are skipped.
double velocity_alignment(const PhaseTrajectory& trajectory, const ProblemSpec& problem);

/// Non-finite numbers are written as null.
nlohmann::ordered_json to_json(const MetricsReport& report);
void write_metrics(const std::string& path, const MetricsReport& report);

}  // namespace tsymp
