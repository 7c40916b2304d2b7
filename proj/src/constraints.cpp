#include "tsymp/constraints.hpp"

namespace tsymp {

int component_count(const Obstacle& obstacle, int space_dim) {
  return std::holds_alternative<RoomBounds>(obstacle) ? 2 * space_dim : 1;
}

int SwarmGeometry::components_per_agent() const {
  int n = 0;
  for (const auto& o : obstacles) n += component_count(o, space_dim);
  return n;
}

void SwarmGeometry::validate() const {
  if (agents < 1) throw SolverError("geometry: need at least one agent");
  if (space_dim < 1) throw SolverError("geometry: space dimension must be positive");
  if (!(agent_radius > 0.0)) throw SolverError("geometry: agent radius C_d must be positive");
  for (const auto& o : obstacles) {
    std::visit(
        [&](const auto& shape) {
          using T = std::decay_t<decltype(shape)>;
          auto check_dim = [&](const Vec& v) {
            if (v.size() != space_dim) throw SolverError("geometry: obstacle dimension mismatch");
          };
          if constexpr (std::is_same_v<T, Circle>) {
            check_dim(shape.center);
            if (!(shape.radius >= 0.0)) throw SolverError("geometry: circle radius must be >= 0");
          } else if constexpr (std::is_same_v<T, CapsuleWall>) {
            check_dim(shape.a);
            check_dim(shape.b);
            if (!(shape.thickness >= 0.0))
              throw SolverError("geometry: capsule thickness must be >= 0");
            if ((shape.a - shape.b).norm() == 0.0)
              throw SolverError("geometry: capsule endpoints must be distinct");
          } else {
            check_dim(shape.lo);
            check_dim(shape.hi);
            if (!(shape.lo.array() < shape.hi.array()).all())
              throw SolverError("geometry: bounds need lo < hi on every axis");
          }
        },
        o);
  }
}

Vec clearance_D(const Obstacle& obstacle, const Vec& w, double agent_radius) {
  const int count = component_count(obstacle, static_cast<int>(w.size()));
  Vec out(count);
  for (int k = 0; k < count; ++k)
    out(k) = detail::obstacle_component<double>(obstacle, k, w, agent_radius, nullptr);
  return out;
}

Vec h1(const SwarmGeometry& geometry, const Vec& positions) {
  const int dim = geometry.space_dim;
  Vec out(geometry.obstacle_rows());
  Eigen::Index row = 0;
  for (int a = 0; a < geometry.agents; ++a) {
    const Vec w = positions.segment(a * dim, dim);
    for (const auto& obstacle : geometry.obstacles) {
      const Vec d = clearance_D(obstacle, w, geometry.agent_radius);
      out.segment(row, d.size()) = d;
      row += d.size();
    }
  }
  return out;
}

Vec h2(const SwarmGeometry& geometry, const Vec& positions) {
  const int dim = geometry.space_dim;
  Vec out(geometry.pair_rows());
  if (!geometry.pairwise) return out;
  for (int j = 1; j < geometry.agents; ++j)
    for (int i = 0; i < j; ++i)
      out(static_cast<Eigen::Index>(pair_index(i, j))) =
          (positions.segment(i * dim, dim) - positions.segment(j * dim, dim)).norm() -
          2.0 * geometry.agent_radius;
  return out;
}

Vec constraint_values(const SwarmGeometry& geometry, const Vec& positions) {
  Vec out(geometry.rows());
  out << h1(geometry, positions), h2(geometry, positions);
  return out;
}

Eigen::SparseMatrix<double> constraint_jacobian(const SwarmGeometry& geometry,
                                                const Vec& positions) {
  const int dim = geometry.space_dim;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(geometry.rows()) * 2 * dim);
  Vec ga(dim), gb(dim);
  for (int row = 0; row < geometry.rows(); ++row) {
    int a = -1, b = -1;
    constraint_row<double>(geometry, positions, row, a, b, ga, gb);
    for (int k = 0; k < dim; ++k) {
      if (ga(k) != 0.0) entries.emplace_back(row, a * dim + k, ga(k));
      if (b >= 0 && gb(k) != 0.0) entries.emplace_back(row, b * dim + k, gb(k));
    }
  }
  Eigen::SparseMatrix<double> jac(geometry.rows(), geometry.agents * dim);
  jac.setFromTriplets(entries.begin(), entries.end());
  return jac;
}

}  // namespace tsymp
