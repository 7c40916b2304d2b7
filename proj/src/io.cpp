#include "tsymp/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tsymp {

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const PhaseTrajectory& tr) {
  const auto n = tr.x.cols(), m = tr.u.cols();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < n; ++i) out << ",p" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
  out << '\n';
  for (Eigen::Index k = 0; k < tr.times.size(); ++k) {
    put(out, tr.times(k));
    for (const Mat* block : {&tr.x, &tr.p, &tr.u})
      for (Eigen::Index i = 0; i < block->cols(); ++i) {
        out << ',';
        put(out, (*block)(k, i));
      }
    out << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const PhaseTrajectory& trajectory) {
  auto out = open_out(path);
  write_trajectory_csv(out, trajectory);
}

PhaseTrajectory read_trajectory_csv(const std::string& path, const ProblemSpec& problem) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory '" + path + "'");
  const Eigen::Index n = problem.dim(), m = problem.control_size();
  const Eigen::Index cols = 1 + 2 * n + m;
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,", 0) != 0)
    throw std::runtime_error(path + ": missing header row");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number");
      row.push_back(v);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                               " columns for this problem, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  const auto nodes = static_cast<Eigen::Index>(rows.size());
  if (nodes < 2) throw std::runtime_error(path + ": need at least two rows");
  PhaseTrajectory tr;
  tr.times.resize(nodes);
  tr.x.resize(nodes, n);
  tr.p.resize(nodes, n);
  tr.u.resize(nodes, m);
  for (Eigen::Index k = 0; k < nodes; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    tr.times(k) = r[0];
    for (Eigen::Index i = 0; i < n; ++i) {
      tr.x(k, i) = r[static_cast<std::size_t>(1 + i)];
      tr.p(k, i) = r[static_cast<std::size_t>(1 + n + i)];
    }
    for (Eigen::Index i = 0; i < m; ++i) tr.u(k, i) = r[static_cast<std::size_t>(1 + 2 * n + i)];
  }
  return tr;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history) {
  auto out = open_out(path);
  out << "iteration,stage,eps,l,loss,wall_ms\n";
  for (const auto& h : history) {
    out << h.iteration << ',' << h.stage << ',';
    put(out, h.eps);
    out << ',';
    put(out, h.l);
    out << ',';
    put(out, h.loss);
    out << ',';
    put(out, h.wall_ms);
    out << '\n';
  }
}

double velocity_alignment(const PhaseTrajectory& tr, const ProblemSpec& problem) {
  const int d = problem.space_dim;
  double total = 0.0;
  double weight = 0.0;
  for (Eigen::Index k = 0; k < tr.times.size(); ++k) {
    // Trapezoid weights on a possibly non-uniform grid.
    double w = 0.0;
    if (k > 0) w += 0.5 * (tr.times(k) - tr.times(k - 1));
    if (k + 1 < tr.times.size()) w += 0.5 * (tr.times(k + 1) - tr.times(k));
    for (int i = 0; i < problem.agents; ++i) {
      if (problem.dynamics[static_cast<std::size_t>(i)].kind != DynamicsKind::newtonian_drag) continue;
      const Vec v = tr.x.row(k).segment(i * problem.state_dim + d, d).transpose();
      const Vec u = tr.u.row(k).segment(i * problem.control_dim, d).transpose();
      const double nu = u.norm(), nv = v.norm();
      if (nu < 1e-12 || nv < 1e-12) continue;
      total += w * u.dot(v) / (nu * nv);
      weight += w;
    }
  }
  return weight > 0.0 ? total / weight : 0.0;
}

MetricsReport trajectory_metrics(const PhaseTrajectory& tr, const ProblemSpec& problem) {
  MetricsReport r;
  r.running_cost = running_cost(problem, tr.times, tr.x, tr.u);
  r.violation = violation_metric(tr, problem);
  r.min_clearance = min_clearance(tr, problem);
  bool newtonian = false;
  for (const auto& dyn : problem.dynamics) newtonian = newtonian || dyn.kind == DynamicsKind::newtonian_drag;
  if (newtonian) r.velocity_alignment = velocity_alignment(tr, problem);
  return r;
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["running_cost"] = number_or_null(r.running_cost);
  j["violation_metric"] = number_or_null(r.violation);
  j["min_clearance"] = number_or_null(r.min_clearance);
  j["velocity_alignment"] = r.velocity_alignment ? number_or_null(*r.velocity_alignment) : nullptr;
  j["final_loss"] = r.final_loss ? number_or_null(*r.final_loss) : nullptr;
  j["converged"] = r.converged ? nlohmann::ordered_json(*r.converged) : nullptr;
  j["seed"] = r.seed;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : r.stages)
    j["stages"].push_back({{"stage", s.stage},
                           {"eps", s.penalty.eps},
                           {"l", s.penalty.l},
                           {"iterations", s.iterations},
                           {"best_loss", number_or_null(s.best_loss)},
                           {"converged", s.converged}});
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

void write_metrics(const std::string& path, const MetricsReport& report) {
  auto out = open_out(path);
  out << to_json(report).dump(2) << '\n';
}

}  // namespace tsymp
