// tsymp: command-line front end for the solver library.
#include "tsymp/checkpoint.hpp"
#include "tsymp/gradcheck.hpp"
#include "tsymp/io.hpp"
#include "tsymp/scenario.hpp"
#include "tsymp/shooting.hpp"
#include "tsymp/trainer.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace tsymp;

namespace {

constexpr int kInternal = 1;
constexpr int kConfig = 2;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_solve(const std::string& config_path, std::optional<std::uint64_t> seed, std::string out_dir, bool quiet) {
  ScenarioConfig cfg = load_scenario_file(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.train.seed = *seed;
  }
  if (out_dir.empty()) out_dir = cfg.output_dir;
  fs::create_directories(out_dir);

  const auto start = std::chrono::steady_clock::now();
  int last_stage = -1;
  auto observer = [&](const HistoryRow& row) {
    if (!quiet && (row.stage != last_stage || row.iteration % 1000 == 0)) {
      std::fprintf(stderr, "stage %d it %d eps %.3g l %.3g loss %.6g\n", row.stage, row.iteration, row.eps, row.l,
                   row.loss);
      last_stage = row.stage;
    }
    return true;
  };
  const TrainResult result = warmup_train(cfg.problem, cfg.train, std::nullopt, observer);

  MetricsReport metrics = trajectory_metrics(result.trajectory, cfg.problem);
  metrics.final_loss = result.final_loss;
  metrics.converged = result.converged;
  metrics.stages = result.stages;
  metrics.seed = cfg.seed;
  metrics.wall_time_s = seconds_since(start);

  write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(), result.trajectory);
  write_history_csv((fs::path(out_dir) / "loss_history.csv").string(), result.history);
  write_metrics((fs::path(out_dir) / "metrics.json").string(), metrics);
  save_checkpoint_file(result.net, (fs::path(out_dir) / "network.ckpt").string());
  if (!quiet) std::cout << to_json(metrics).dump(2) << '\n';
  return 0;
}

int cmd_shoot(const std::string& config_path, const std::string& init_from, std::string out_dir) {
  const ScenarioConfig cfg = load_scenario_file(config_path);
  std::optional<PhaseTrajectory> guide;
  ShootingConfig sc = cfg.shooting;
  if (!init_from.empty()) {
    guide = read_trajectory_csv(init_from, cfg.problem);
    sc.initial_costate = guide->p.row(0).transpose();
  }
  const auto start = std::chrono::steady_clock::now();
  const ShootingResult res = shoot(cfg.problem, sc, guide ? &*guide : nullptr);

  nlohmann::ordered_json report;
  report["converged"] = res.converged;
  report["residual"] = res.residual;
  report["iterations"] = res.iterations;
  report["p0"] = std::vector<double>(res.p0.data(), res.p0.data() + res.p0.size());
  MetricsReport m = trajectory_metrics(res.trajectory, cfg.problem);
  report["running_cost"] = m.running_cost;
  if (guide) report["max_gap_vs_init"] = trajectory_gap(*guide, res.trajectory);
  report["wall_time_s"] = seconds_since(start);

  if (out_dir.empty()) out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  write_trajectory_csv((fs::path(out_dir) / "shooting.csv").string(), res.trajectory);
  std::ofstream((fs::path(out_dir) / "shooting.json").string()) << report.dump(2) << '\n';
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_gradcheck(const std::vector<std::string>& configs, const std::vector<std::string>& kinds, int points) {
  std::vector<ScenarioConfig> scenarios;
  for (const auto& path : configs) scenarios.push_back(load_scenario_file(path));
  for (const auto& kind : kinds) scenarios.push_back(build_scenario(kind));
  if (scenarios.empty())
    for (const auto& kind : scenario_kinds()) scenarios.push_back(build_scenario(kind));

  GradcheckOptions opt;
  opt.points = points;
  bool ok = true;
  for (const auto& sc : scenarios) {
    const GradcheckReport report = run_gradcheck(sc, opt);
    for (const auto& s : report.suites) {
      std::printf("%-14s %-17s checks %4d  worst %.3e  tol %.0e  %s\n", report.scenario.c_str(), s.name.c_str(),
                  s.checks, s.worst, s.tolerance, s.passed() ? "ok" : "FAIL");
    }
    ok = ok && report.passed();
  }
  return ok ? 0 : kInternal;
}

int cmd_metrics(const std::string& traj, const std::string& config_path) {
  const ScenarioConfig cfg = load_scenario_file(config_path);
  const PhaseTrajectory tr = read_trajectory_csv(traj, cfg.problem);
  MetricsReport m = trajectory_metrics(tr, cfg.problem);
  m.seed = cfg.seed;
  std::cout << to_json(m).dump(2) << '\n';
  return 0;
}

int cmd_scenario(const std::string& kind, const std::vector<std::string>& sets, const std::string& out) {
  const ScenarioConfig cfg = build_scenario(kind, sets);
  const std::string text = serialize_scenario(cfg);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    f << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent symplectic network solver for constrained optimal control"};
  app.require_subcommand(1);

  std::string config, out, traj, init_from, kind;
  std::uint64_t seed = 0;
  bool quiet = false;
  int points = 100;
  std::vector<std::string> configs, kinds, sets;

  auto* solve = app.add_subcommand("solve", "train, roll out, write trajectory/history/metrics");
  solve->add_option("--config", config, "scenario file")->required();
  auto* seed_opt = solve->add_option("--seed", seed, "overrides the file's seed");
  solve->add_option("--out", out, "output directory (default: the file's output_dir)");
  solve->add_flag("--quiet", quiet, "no progress output");

  auto* shoot_cmd = app.add_subcommand("shoot", "single-shooting validator");
  shoot_cmd->add_option("--config", config, "scenario file")->required();
  shoot_cmd->add_option("--init-from", init_from, "trajectory CSV to seed p(0) and guide continuation");
  shoot_cmd->add_option("--out", out, "output directory");

  auto* grad = app.add_subcommand("gradcheck", "analytic gradients vs central differences");
  grad->add_option("--config", configs, "scenario files (default: every built-in family)");
  grad->add_option("--kind", kinds, "built-in scenario kinds");
  grad->add_option("--points", points, "random points per suite")->check(CLI::PositiveNumber);

  auto* metrics = app.add_subcommand("metrics", "recompute metrics from a trajectory CSV");
  metrics->add_option("--traj", traj, "trajectory CSV")->required();
  metrics->add_option("--config", config, "scenario file the trajectory belongs to")->required();

  auto* scen = app.add_subcommand("scenario", "print or write a canonical scenario file");
  scen->add_option("kind", kind, "oscillator, single_circle, four_circle, room_<M>, maze, box3d_swarm, custom")
      ->required();
  scen->add_option("--set", sets, "dotted.path=value override (repeatable)");
  scen->add_option("--out", out, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfig;
  }

  try {
    if (*solve) return cmd_solve(config, *seed_opt ? std::optional(seed) : std::nullopt, out, quiet);
    if (*shoot_cmd) return cmd_shoot(config, init_from, out);
    if (*grad) return cmd_gradcheck(configs, kinds, points);
    if (*metrics) return cmd_metrics(traj, config);
    if (*scen) return cmd_scenario(kind, sets, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInternal;
  }
  return kInternal;
}
