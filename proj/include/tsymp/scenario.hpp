#pragma once

#include "tsymp/problem.hpp"
#include "tsymp/shooting.hpp"
#include "tsymp/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tsymp {

/// Everything one CLI run needs. Every field is explicit in the file form;
/// parsing rejects missing and unknown keys.
struct ScenarioConfig {
  std::string kind;  // oscillator, single_circle, four_circle, room_<M>, maze, box3d_swarm, custom
  ProblemSpec problem;
  TrainConfig train;
  ShootingConfig shooting;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
};

nlohmann::ordered_json to_json(const ScenarioConfig& config);
/// Throws ConfigError naming the offending field path.
ScenarioConfig parse_scenario(const nlohmann::ordered_json& doc);
ScenarioConfig parse_scenario_text(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);
std::string serialize_scenario(const ScenarioConfig& config);

/// Sets a dotted path ("problem.geometry.agent_radius=0.16") in the tree.
/// The right-hand side is read as JSON, falling back to a plain string.
void apply_override(nlohmann::ordered_json& doc, const std::string& assignment);

/// Canonical parameter set for a scenario family, with overrides applied.
ScenarioConfig build_scenario(const std::string& kind, const std::vector<std::string>& overrides = {});

/// Names accepted by build_scenario (room sizes listed as shipped).
std::vector<std::string> scenario_kinds();

}  // namespace tsymp
