#include "support.hpp"
#include "tsymp/latent_lqr.hpp"
#include "tsymp/shooting.hpp"

#include <doctest.h>

#include <numbers>

using namespace tsymp;
using testing::Gen;

namespace {

LatentSubsystem double_integrator() {
  LatentSubsystem s;
  s.A = Mat::Zero(2, 2);
  s.A(0, 1) = 1.0;
  s.B = Mat::Zero(2, 1);
  s.B(1, 0) = 1.0;
  s.Q = Mat::Zero(2, 2);
  s.R = Mat::Constant(1, 1, 0.5);
  return s;
}

// Independent RK4 on z' = M z.
Vec rk4_linear(const Mat& m, const Vec& z0, double T, int steps) {
  Vec z = z0;
  const double h = T / steps;
  for (int i = 0; i < steps; ++i) {
    const Vec k1 = m * z, k2 = m * (z + 0.5 * h * k1), k3 = m * (z + 0.5 * h * k2), k4 = m * (z + h * k3);
    z += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return z;
}

ProblemSpec planar_problem(double drag, const Mat& phi, const Mat& s) {
  ProblemSpec p;
  p.agents = 2;
  p.space_dim = 2;
  p.state_dim = 4;
  p.control_dim = 2;
  p.horizon = 3.0;
  p.x0 = Vec::Zero(8);
  p.xT = Vec::Ones(8);
  p.dynamics.assign(2, SubsystemDynamics::newtonian(2, drag));
  p.costs.assign(2, QuadraticCost::make(phi, s));
  return p;
}

}  // namespace

TEST_CASE("linearize: drag vanishes at v = 0 and R = S^-1 / 2") {
  Mat phi = Mat::Zero(4, 4);
  phi.bottomRightCorner(2, 2).setIdentity();
  Mat s(2, 2);
  s << 2.0, 0.5, 0.5, 1.0;
  const auto subs = linearize(planar_problem(1.5, phi, s));
  REQUIRE(subs.size() == 2);
  Mat A = Mat::Zero(4, 4);
  A.topRightCorner(2, 2).setIdentity();
  CHECK(subs[0].A.isApprox(A));
  CHECK(subs[0].Q.isApprox(0.5 * phi));
  CHECK(subs[0].R.isApprox(0.5 * s.inverse()));
  const auto plain = linearize(planar_problem(0.0, Mat::Zero(4, 4), Mat::Identity(2, 2)));
  CHECK(plain[1].Q.isZero());
  CHECK(plain[1].R.isApprox(0.5 * Mat::Identity(2, 2)));
}

TEST_CASE("Hamiltonian matrix of the double integrator") {
  const Mat h = build_hamiltonian_matrix(double_integrator()).matrix();
  Mat expected(4, 4);
  expected << 0, 1, 0, 0,  //
      0, 0, 0, 1,          //
      0, 0, 0, 0,          //
      0, 0, -1, 0;
  CHECK(h.isApprox(expected));
}

TEST_CASE("Hamiltonian matrix with A = 0, B = Q = R = I") {
  LatentSubsystem s{Mat::Zero(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2)};
  Mat expected = Mat::Zero(4, 4);
  expected.topRightCorner(2, 2) = 2 * Mat::Identity(2, 2);
  expected.bottomLeftCorner(2, 2) = 2 * Mat::Identity(2, 2);
  CHECK(build_hamiltonian_matrix(s).matrix().isApprox(expected));
}

TEST_CASE("J H is symmetric for random subsystems") {
  Gen g(41);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = g.integer(1, 6), m = g.integer(1, 4);
    Mat q = g.mat(n, n);
    q = (q + q.transpose()).eval();
    LatentSubsystem s{g.mat(n, n), g.mat(n, m), q, g.spd(m)};
    const Mat h = build_hamiltonian_matrix(s).matrix();
    const Mat jh = testing::symplectic_J(n) * h;
    CHECK((jh - jh.transpose()).lpNorm<Eigen::Infinity>() <= 1e-13 * std::max(1.0, jh.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("matrix_exponential hand cases") {
  CHECK(matrix_exponential(Mat::Zero(3, 3), 2.0).isApprox(Mat::Identity(3, 3)));
  Mat nil(2, 2);
  nil << 0, 1, 0, 0;
  Mat shear(2, 2);
  shear << 1, 3, 0, 1;
  CHECK((matrix_exponential(nil, 3.0) - shear).norm() < 1e-14);
  Mat rot(2, 2);
  rot << 0, 1, -1, 0;
  for (double t : {0.1, 1.0, 2.5, 7.0}) {
    Mat expected(2, 2);
    expected << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    CHECK((matrix_exponential(rot, t) - expected).norm() < 1e-13);
  }
}

TEST_CASE("e^{Ht} against RK4 and symplecticity on random Hamiltonian matrices") {
  Gen g(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(1, 4);
    Mat q = g.mat(n, n, 0.3);
    q = q * q.transpose();
    const Mat h = build_hamiltonian_matrix({g.mat(n, n, 0.5), g.mat(n, n, 0.5), q, g.spd(n) * 0.2}).matrix();
    const double t = g.uniform(0.1, 1.0);
    const Mat e = matrix_exponential(h, t);
    const Vec z0 = g.vec(2 * n);
    CHECK((e * z0 - rk4_linear(h, z0, t, 1000)).lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(1.0, (e * z0).norm()));
    const Mat J = testing::symplectic_J(n);
    CHECK((e.transpose() * J * e - J).lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, e.squaredNorm()));
  }
}

TEST_CASE("solve_initial_costate: double integrator") {
  const auto h = build_hamiltonian_matrix(double_integrator());
  Vec x0 = Vec::Zero(2), xT(2);
  xT << 1, 0;
  const Vec q0 = solve_initial_costate(h, x0, xT, 1.0);
  Vec z0(4);
  z0 << x0, q0;
  const Vec zT = rk4_linear(h.matrix(), z0, 1.0, 1000);
  CHECK((zT.head(2) - xT).norm() < 1e-6);
  CHECK(solve_initial_costate(h, x0, x0, 1.0).norm() == 0.0);
}

TEST_CASE("solve_initial_costate: oscillator gives q0 = 0") {
  Mat m(2, 2);
  m << 0, 1, -1, 0;
  const HamiltonianMatrix h(m);
  const double T = std::numbers::pi / 4;
  const Vec q0 = solve_initial_costate(h, Vec::Ones(1), Vec::Constant(1, std::cos(T)), T);
  CHECK(std::abs(q0(0)) < 1e-12);
}

TEST_CASE("singular boundary block is an error") {
  LatentSubsystem s{Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Identity(1, 1)};
  const auto h = build_hamiltonian_matrix(s);
  CHECK_THROWS_AS(solve_initial_costate(h, Vec::Zero(1), Vec::Ones(1), 1.0), SolverError);
}

TEST_CASE("latent_trajectory: nodes follow the flow and hit the boundary") {
  Gen g(43);
  for (int trial = 0; trial < 10; ++trial) {
    const auto h = build_hamiltonian_matrix(double_integrator());
    const Vec x0 = g.vec(2), xT = g.vec(2);
    const double T = g.uniform(0.5, 3.0);
    const LatentTrajectory lt = latent_trajectory({h}, x0, xT, T, 50);
    REQUIRE(lt.nodes() == 51);
    CHECK(lt.y.row(0).transpose() == x0);
    CHECK((lt.y.row(50).transpose() - xT).norm() <= 1e-8);
    Vec z0(4);
    z0 << x0, lt.q.row(0).transpose();
    for (int k : {10, 25, 50}) {
      CHECK((lt.phase(k) - rk4_linear(h.matrix(), z0, lt.times(k), 1000)).norm() <= 1e-6);
      CHECK((lt.velocity(k) - h.matrix() * lt.phase(k)).norm() <= 1e-12 * std::max(1.0, lt.phase(k).norm()));
    }
  }
}

TEST_CASE("latent_trajectory: oscillator is (cos, -sin)") {
  Mat m(2, 2);
  m << 0, 1, -1, 0;
  const double T = std::numbers::pi / 4;
  const LatentTrajectory lt = latent_trajectory({HamiltonianMatrix(m)}, Vec::Ones(1), Vec::Constant(1, std::cos(T)), T, 100);
  for (Eigen::Index k = 0; k < lt.nodes(); ++k) {
    CHECK(lt.y(k, 0) == doctest::Approx(std::cos(lt.times(k))).epsilon(1e-12));
    CHECK(std::abs(lt.q(k, 0) + std::sin(lt.times(k))) < 1e-12);
  }
}

TEST_CASE("solve_latent stacks subsystems agent-major") {
  ProblemSpec p = planar_problem(0.0, Mat::Zero(4, 4), Mat::Identity(2, 2));
  p.xT.segment(4, 4).setZero();
  const LatentTrajectory lt = solve_latent(p, 20);
  CHECK(lt.half_dim() == 8);
  CHECK((lt.y.row(20).transpose() - p.xT).norm() < 1e-8);
  // The second agent starts and ends at rest at the origin.
  CHECK(lt.y.block(0, 4, 21, 4).norm() < 1e-12);
}
