#pragma once

#include "tsymp/types.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <cstddef>
#include <variant>
#include <vector>

namespace tsymp {

// Obstacle shapes. Clearance D is negative when the agent disk/ball
// (radius C_d) overlaps the shape.

struct Circle {
  Vec center;
  double radius = 0.0;  // C_o
};

/// Axis-aligned room walls. Contributes 2*dim components
/// (w_k - lo_k, hi_k - w_k) per axis, optionally shrunk by C_d.
struct RoomBounds {
  Vec lo;
  Vec hi;
  bool inflate = false;
};

/// Wall of half-thickness C_o around segment [a, b].
struct CapsuleWall {
  Vec a;
  Vec b;
  double thickness = 0.0;
};

/// Solid axis-aligned box [lo, hi].
struct Box {
  Vec lo;
  Vec hi;
};

using Obstacle = std::variant<Circle, RoomBounds, CapsuleWall, Box>;

struct SwarmGeometry {
  int agents = 1;
  int space_dim = 2;
  double agent_radius = 0.0;  // C_d
  std::vector<Obstacle> obstacles;
  bool pairwise = true;

  void validate() const;

  /// n_o: clearance components contributed by one agent.
  int components_per_agent() const;
  int obstacle_rows() const { return agents * components_per_agent(); }
  int pair_rows() const { return pairwise ? agents * (agents - 1) / 2 : 0; }
  int rows() const { return obstacle_rows() + pair_rows(); }
};

int component_count(const Obstacle& obstacle, int space_dim);

/// Pair (i, j), i < j, zero-based, maps to row i + j(j-1)/2 of h2.
inline std::size_t pair_index(std::size_t i, std::size_t j) { return i + j * (j - 1) / 2; }

/// Clearance components of one obstacle at position w.
Vec clearance_D(const Obstacle& obstacle, const Vec& w, double agent_radius);

/// h1: all obstacle clearances, agent-major. `positions` has agents*dim entries.
Vec h1(const SwarmGeometry& geometry, const Vec& positions);

/// h2: pairwise center distance minus 2 C_d.
Vec h2(const SwarmGeometry& geometry, const Vec& positions);

/// (h1, h2) stacked.
Vec constraint_values(const SwarmGeometry& geometry, const Vec& positions);

/// Rows = constraint components, cols = position coordinates.
Eigen::SparseMatrix<double> constraint_jacobian(const SwarmGeometry& geometry,
                                                const Vec& positions);

namespace detail {

template <class S>
S norm_of(const VecT<S>& v) {
  using std::sqrt;
  S s(0.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i) * v(i);
  return sqrt(s);
}

template <class S>
VecT<S> unit_or_zero(const VecT<S>& v, const S& norm) {
  if (norm > 0.0) return v / norm;
  return VecT<S>::Zero(v.size());
}

// Component `k` of one obstacle at w together with its spatial gradient.
template <class S>
S obstacle_component(const Obstacle& obstacle, int k, const VecT<S>& w, double agent_radius,
                     VecT<S>* grad) {
  const auto dim = w.size();
  if (const auto* c = std::get_if<Circle>(&obstacle)) {
    const VecT<S> d = w - c->center.cast<S>();
    const S r = norm_of(d);
    if (grad) *grad = unit_or_zero(d, r);
    return r - (c->radius + agent_radius);
  }
  if (const auto* room = std::get_if<RoomBounds>(&obstacle)) {
    const auto axis = static_cast<Eigen::Index>(k / 2);
    const bool lower = (k % 2) == 0;
    const double offset = room->inflate ? agent_radius : 0.0;
    if (grad) {
      *grad = VecT<S>::Zero(dim);
      (*grad)(axis) = S(lower ? 1.0 : -1.0);
    }
    return lower ? S(w(axis) - room->lo(axis) - offset) : S(room->hi(axis) - w(axis) - offset);
  }
  if (const auto* cap = std::get_if<CapsuleWall>(&obstacle)) {
    const Vec seg = cap->b - cap->a;
    const VecT<S> rel = w - cap->a.cast<S>();
    S s = rel.dot(seg.cast<S>()) / seg.squaredNorm();
    // Clamped projection; the derivative of the clamp is zero outside
    // (0, 1), which gives the endpoint-distance gradient.
    if (s < 0.0) s = S(0.0);
    if (s > 1.0) s = S(1.0);
    const VecT<S> d = rel - s * seg.cast<S>();
    const S r = norm_of(d);
    if (grad) *grad = unit_or_zero(d, r);
    return r - (cap->thickness + agent_radius);
  }
  const auto& box = std::get<Box>(obstacle);
  S best(0.0);
  Eigen::Index best_axis = 0;
  double best_sign = 0.0;
  bool first = true;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const S below = box.lo(i) - agent_radius - w(i);
    const S above = w(i) - box.hi(i) - agent_radius;
    if (first || below > best) {
      best = below;
      best_axis = i;
      best_sign = -1.0;
      first = false;
    }
    if (above > best) {
      best = above;
      best_axis = i;
      best_sign = 1.0;
    }
  }
  if (grad) {
    *grad = VecT<S>::Zero(dim);
    (*grad)(best_axis) = S(best_sign);
  }
  return best;
}

}  // namespace detail

/// Value of constraint row `row` and its gradient with respect to the
/// stacked positions, restricted to the (at most two) agents involved.
/// `agent_a`/`agent_b` receive the involved agent indices (agent_b = -1
/// for obstacle rows); `grad_a`/`grad_b` the matching spatial gradients.
template <class S>
S constraint_row(const SwarmGeometry& geometry, const VecT<S>& positions, int row, int& agent_a,
                 int& agent_b, VecT<S>& grad_a, VecT<S>& grad_b) {
  const int dim = geometry.space_dim;
  const int per_agent = geometry.components_per_agent();
  if (row < geometry.obstacle_rows()) {
    agent_a = row / per_agent;
    agent_b = -1;
    int local = row % per_agent;
    const VecT<S> w = positions.segment(agent_a * dim, dim);
    for (const auto& obstacle : geometry.obstacles) {
      const int count = component_count(obstacle, dim);
      if (local < count)
        return detail::obstacle_component(obstacle, local, w, geometry.agent_radius, &grad_a);
      local -= count;
    }
    throw SolverError("constraint_row: obstacle row out of range");
  }
  const int pair = row - geometry.obstacle_rows();
  // Invert pair_index: largest j with j(j-1)/2 <= pair.
  int j = 1;
  while ((j + 1) * j / 2 <= pair) ++j;
  const int i = pair - j * (j - 1) / 2;
  agent_a = i;
  agent_b = j;
  const VecT<S> d = positions.segment(i * dim, dim) - positions.segment(j * dim, dim);
  const S r = detail::norm_of(d);
  grad_a = detail::unit_or_zero(d, r);
  grad_b = -grad_a;
  return r - 2.0 * geometry.agent_radius;
}

}  // namespace tsymp
