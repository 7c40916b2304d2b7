#include "support.hpp"
#include "tsymp/constraints.hpp"

#include <doctest.h>

using namespace tsymp;
using testing::Gen;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

SwarmGeometry maze_scene(int agents) {
  SwarmGeometry g;
  g.agents = agents;
  g.space_dim = 2;
  g.agent_radius = 0.02;
  g.obstacles.push_back(RoomBounds{v2(-0.5, -0.5), v2(0.5, 0.5), false});
  g.obstacles.push_back(CapsuleWall{v2(-0.5, 0.15), v2(0.15, 0.15), 0.02});
  g.obstacles.push_back(CapsuleWall{v2(-0.15, -0.15), v2(0.5, -0.15), 0.02});
  g.obstacles.push_back(Circle{v2(0.3, 0.3), 0.05});
  return g;
}

}  // namespace

TEST_CASE("circle clearance") {
  const Obstacle c = Circle{v2(0, 0), 0.15};
  CHECK(clearance_D(c, v2(0.3, 0.0), 0.05)(0) == doctest::Approx(0.1));
  CHECK(clearance_D(c, v2(0.1, 0.0), 0.05)(0) < 0.0);
}

TEST_CASE("room clearance has two components per axis") {
  const Obstacle r = RoomBounds{v2(-0.5, -0.5), v2(0.5, 0.5), false};
  const Vec d = clearance_D(r, v2(0.2, -0.4), 0.02);
  REQUIRE(d.size() == 4);
  CHECK(d(0) == doctest::Approx(0.7));
  CHECK(d(1) == doctest::Approx(0.3));
  CHECK(d(2) == doctest::Approx(0.1));
  CHECK(d(3) == doctest::Approx(0.9));
  const Obstacle inflated = RoomBounds{v2(-0.5, -0.5), v2(0.5, 0.5), true};
  CHECK(clearance_D(inflated, v2(0.2, -0.4), 0.02)(2) == doctest::Approx(0.08));
}

TEST_CASE("capsule clearance uses the closest segment point") {
  const Obstacle w = CapsuleWall{v2(0, 0), v2(1, 0), 0.1};
  CHECK(clearance_D(w, v2(0.5, 0.5), 0.0)(0) == doctest::Approx(0.4));
  CHECK(clearance_D(w, v2(-0.3, 0.4), 0.0)(0) == doctest::Approx(0.4));
  CHECK(clearance_D(w, v2(1.0, -0.2), 0.05)(0) == doctest::Approx(0.05));
}

TEST_CASE("box clearance is the largest signed axis gap") {
  Vec lo(3), hi(3);
  lo << -1, -1, -1;
  hi << 1, 1, 1;
  const Obstacle b = Box{lo, hi};
  Vec w(3);
  w << 3, 0, 0.5;
  CHECK(clearance_D(b, w, 0.2)(0) == doctest::Approx(1.8));
  w << 0, 0, 0;
  CHECK(clearance_D(b, w, 0.2)(0) < 0.0);
}

TEST_CASE("h2: two agents 0.1 apart with C_d = 0.02") {
  SwarmGeometry g;
  g.agents = 2;
  g.space_dim = 2;
  g.agent_radius = 0.02;
  Vec w(4);
  w << 0, 0, 0.1, 0;
  CHECK(h2(g, w)(0) == doctest::Approx(0.06));
}

TEST_CASE("pair_index layout") {
  CHECK(pair_index(0, 1) == 0);
  CHECK(pair_index(0, 2) == 1);
  CHECK(pair_index(1, 2) == 2);
  // Agents 1 and 3 in one-based numbering: index 1 + 2*1/2 = 2 one-based.
  CHECK(pair_index(0, 2) + 1 == 2);
}

TEST_CASE("constraint counts") {
  const SwarmGeometry g = maze_scene(3);
  CHECK(g.components_per_agent() == 4 + 1 + 1 + 1);
  CHECK(g.obstacle_rows() == 21);
  CHECK(g.pair_rows() == 3);
  SwarmGeometry solo = g;
  solo.pairwise = false;
  CHECK(solo.rows() == 21);
}

TEST_CASE("constraint_jacobian: hand rows") {
  SwarmGeometry g;
  g.agents = 2;
  g.space_dim = 2;
  g.agent_radius = 0.01;
  g.obstacles.push_back(Circle{v2(0, 0), 0.1});
  Vec w(4);
  w << 0.3, 0, 0, 0.5;
  const Mat J = Mat(constraint_jacobian(g, w));
  REQUIRE(J.rows() == 3);
  CHECK(J(0, 0) == doctest::Approx(1.0));
  CHECK(J(0, 1) == doctest::Approx(0.0));
  const Vec d = w.head(2) - w.tail(2);
  CHECK(J(2, 0) == doctest::Approx(d(0) / d.norm()));
  CHECK(J(2, 3) == doctest::Approx(-d(1) / d.norm()));
}

TEST_CASE("constraint_jacobian matches differences on random maze scenes") {
  Gen g(21);
  const SwarmGeometry geo = maze_scene(3);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec w = g.vec(6, 0.3);
    const Mat J = Mat(constraint_jacobian(geo, w));
    for (int r = 0; r < geo.rows(); ++r) {
      auto f = [&](const Vec& y) { return constraint_values(geo, y)(r); };
      const Vec fd = testing::fd_gradient(f, w, 1e-7);
      // Skip rows whose difference stencil straddles a kink.
      const Vec fd2 = testing::fd_gradient(f, w, 1e-6);
      if ((fd - fd2).lpNorm<Eigen::Infinity>() > 1e-5) continue;
      CHECK((J.row(r).transpose() - fd).lpNorm<Eigen::Infinity>() < 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 1500);
}

TEST_CASE("circle, capsule and room clearances are 1-Lipschitz") {
  Gen g(22);
  const SwarmGeometry geo = maze_scene(1);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec a = g.vec(2, 0.4), b = g.vec(2, 0.4);
    const Vec ha = h1(geo, a), hb = h1(geo, b);
    CHECK((ha - hb).lpNorm<Eigen::Infinity>() <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("h2 is symmetric under swapping a pair") {
  Gen g(23);
  SwarmGeometry geo;
  geo.agents = 4;
  geo.space_dim = 2;
  geo.agent_radius = 0.03;
  for (int trial = 0; trial < 50; ++trial) {
    Vec w = g.vec(8);
    const Vec before = h2(geo, w);
    w.segment(2, 2).swap(w.segment(6, 2));  // swap agents 1 and 3
    const Vec after = h2(geo, w);
    CHECK(before(pair_index(1, 3)) == doctest::Approx(after(pair_index(1, 3))));
    CHECK(before(pair_index(0, 1)) == doctest::Approx(after(pair_index(0, 3))));
    CHECK(before(pair_index(0, 2)) == doctest::Approx(after(pair_index(0, 2))));
  }
}

TEST_CASE("all components positive iff brute-force scene is collision free") {
  Gen g(24);
  SwarmGeometry geo;
  geo.agents = 3;
  geo.space_dim = 2;
  geo.agent_radius = 0.05;
  geo.obstacles.push_back(Circle{v2(0, 0), 0.2});
  for (int trial = 0; trial < 500; ++trial) {
    const Vec w = g.vec(6, 0.4);
    bool free = true;
    for (int i = 0; i < 3; ++i) {
      if (w.segment(2 * i, 2).norm() <= 0.25) free = false;
      for (int j = i + 1; j < 3; ++j)
        if ((w.segment(2 * i, 2) - w.segment(2 * j, 2)).norm() <= 0.1) free = false;
    }
    CHECK(free == (constraint_values(geo, w).minCoeff() > 0.0));
  }
}

TEST_CASE("geometry validation") {
  SwarmGeometry g;
  g.agents = 1;
  g.space_dim = 2;
  g.agent_radius = -1.0;
  CHECK_THROWS_AS(g.validate(), SolverError);
  g.agent_radius = 0.1;
  g.obstacles.push_back(Circle{Vec::Zero(3), 0.1});
  CHECK_THROWS_AS(g.validate(), SolverError);
}
