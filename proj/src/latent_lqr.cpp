#include "tsymp/latent_lqr.hpp"

#include "tsymp/autodiff.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <sstream>

namespace tsymp {

void LatentSubsystem::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || Q.rows() != n || Q.cols() != n || B.rows() != n || R.rows() != B.cols() ||
      R.cols() != B.cols())
    throw SolverError("latent subsystem: inconsistent block shapes");
  if (!Q.isApprox(Q.transpose(), 1e-12) || !R.isApprox(R.transpose(), 1e-12))
    throw SolverError("latent subsystem: Q and R must be symmetric");
  if (!A.allFinite() || !B.allFinite() || !Q.allFinite() || !R.allFinite())
    throw SolverError("latent subsystem: non-finite entries");
  Eigen::LLT<Mat> llt(R);
  if (llt.info() != Eigen::Success) throw SolverError("latent subsystem: R is not positive definite");
}

HamiltonianMatrix::HamiltonianMatrix(Mat h) : h_(std::move(h)) {
  if (h_.rows() != h_.cols() || h_.rows() % 2 != 0)
    throw SolverError("Hamiltonian matrix must be square with even size");
}

Mat symplectic_form(Eigen::Index n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return j;
}

std::vector<LatentSubsystem> linearize(const ProblemSpec& problem) {
  problem.validate();
  std::vector<LatentSubsystem> subs;
  subs.reserve(problem.agents);
  const int n = problem.state_dim;
  for (int i = 0; i < problem.agents; ++i) {
    // Jacobian of the drift at 0 by forward differentiation, one column
    // per seed direction.
    ProblemSpec single = problem;
    single.agents = 1;
    single.dynamics = {problem.dynamics[i]};
    single.costs = {problem.costs[i]};
    single.geometry.reset();
    single.x0 = Vec::Zero(n);
    single.xT = Vec::Zero(n);
    Mat A(n, n);
    for (int c = 0; c < n; ++c) {
      VecT<Dual> x(n), p(n), gx, gp;
      for (int k = 0; k < n; ++k) {
        x(k) = make_dual(0.0, k == c ? 1.0 : 0.0);
        p(k) = make_dual(0.0, 0.0);
      }
      // grad_p H = f(x) + B S^-1 B^T p; with p = 0 its x-tangent is Jf(0).
      hamiltonian_gradient<Dual>(single, x, p, gx, gp);
      for (int r = 0; r < n; ++r) A(r, c) = tangent_of(gp(r));
    }
    const auto& cost = problem.costs[i];
    LatentSubsystem sub{A, problem.dynamics[i].B, 0.5 * cost.state_weight, 0.5 * cost.control_inverse};
    Eigen::LLT<Mat> llt(sub.R);
    if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "linearize: subsystem " << i << " has non-positive-definite R";
      throw SolverError(msg.str());
    }
    sub.validate();
    subs.push_back(std::move(sub));
  }
  return subs;
}

HamiltonianMatrix build_hamiltonian_matrix(const LatentSubsystem& sub) {
  sub.validate();
  const auto n = sub.A.rows();
  Mat h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = sub.A;
  h.topRightCorner(n, n) = 2.0 * sub.B * sub.R * sub.B.transpose();
  h.bottomLeftCorner(n, n) = 2.0 * sub.Q;
  h.bottomRightCorner(n, n) = -sub.A.transpose();
  return HamiltonianMatrix(std::move(h));
}

Mat matrix_exponential(const Mat& m, double t) {
  if (m.rows() != m.cols()) throw SolverError("matrix_exponential: square matrix required");
  const Mat scaled = m * t;
  return scaled.exp();
}

Vec solve_initial_costate(const HamiltonianMatrix& h, const Vec& x0, const Vec& xT, double horizon,
                          int subsystem) {
  const auto n = h.half_dim();
  if (x0.size() != n || xT.size() != n) throw SolverError("solve_initial_costate: dimension mismatch");
  const Mat flow = matrix_exponential(h.matrix(), horizon);
  const Mat coupling = flow.topRightCorner(n, n);
  const Vec rhs = xT - flow.topLeftCorner(n, n) * x0;

  Eigen::JacobiSVD<Mat> svd(coupling);
  const auto& sv = svd.singularValues();
  const double cond = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e12)) {
    std::ostringstream msg;
    msg << "solve_initial_costate: subsystem " << subsystem
        << " has a singular or ill-conditioned boundary block (condition number " << cond
        << "); the latent system is uncontrollable or T is a conjugate time";
    throw SolverError(msg.str());
  }
  return coupling.partialPivLu().solve(rhs);
}

Vec LatentTrajectory::phase(Eigen::Index k) const {
  Vec z(2 * half_dim());
  z << y.row(k).transpose(), q.row(k).transpose();
  return z;
}

Vec LatentTrajectory::velocity(Eigen::Index k) const {
  Vec z(2 * half_dim());
  z << ydot.row(k).transpose(), qdot.row(k).transpose();
  return z;
}

LatentTrajectory latent_trajectory(const std::vector<HamiltonianMatrix>& blocks, const Vec& x0,
                                   const Vec& xT, double horizon, int steps, double boundary_tol) {
  if (steps < 1) throw SolverError("latent_trajectory: need at least one grid step");
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.half_dim();
  if (x0.size() != total || xT.size() != total)
    throw SolverError("latent_trajectory: boundary dimension does not match the blocks");

  LatentTrajectory out;
  out.blocks = blocks;
  out.times.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) out.times(k) = horizon * k / steps;
  out.times(steps) = horizon;
  out.y.resize(steps + 1, total);
  out.q.resize(steps + 1, total);
  out.ydot.resize(steps + 1, total);
  out.qdot.resize(steps + 1, total);

  Eigen::Index offset = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& h = blocks[b];
    const auto n = h.half_dim();
    const Vec xb0 = x0.segment(offset, n);
    const Vec xbT = xT.segment(offset, n);
    const Vec q0 = solve_initial_costate(h, xb0, xbT, horizon, static_cast<int>(b));
    Vec z0(2 * n);
    z0 << xb0, q0;
    for (int k = 0; k <= steps; ++k) {
      Vec z = k == 0 ? z0 : Vec(matrix_exponential(h.matrix(), out.times(k)) * z0);
      if (k == steps) {
        const double residual = (z.head(n) - xbT).norm();
        if (!(residual <= boundary_tol * std::max(1.0, xbT.norm()))) {
          std::ostringstream msg;
          msg << "latent_trajectory: subsystem " << b << " misses the terminal state by " << residual;
          throw SolverError(msg.str());
        }
        z.head(n) = xbT;
      }
      const Vec dz = h.matrix() * z;
      out.y.row(k).segment(offset, n) = z.head(n).transpose();
      out.q.row(k).segment(offset, n) = z.tail(n).transpose();
      out.ydot.row(k).segment(offset, n) = dz.head(n).transpose();
      out.qdot.row(k).segment(offset, n) = dz.tail(n).transpose();
    }
    offset += n;
  }
  return out;
}

LatentTrajectory solve_latent(const ProblemSpec& problem, int steps) {
  std::vector<HamiltonianMatrix> blocks;
  for (const auto& sub : linearize(problem)) blocks.push_back(build_hamiltonian_matrix(sub));
  return latent_trajectory(blocks, problem.x0, problem.xT, problem.horizon, steps);
}

}  // namespace tsymp
