#pragma once

#include "tsymp/problem.hpp"
#include "tsymp/types.hpp"

#include <vector>

namespace tsymp {

/// Quadratic model of one subsystem:
///   H~_i(y, q) = <q, A y> - <y, Q y> + <B^T q, R B^T q>.
struct LatentSubsystem {
  Mat A;
  Mat B;
  Mat Q;
  Mat R;

  void validate() const;
};

/// Linear Hamiltonian vector field of a latent subsystem:
/// d/ds (y, q) = H (y, q) with H = [[A, 2 B R B^T], [2 Q, -A^T]], so that
/// J H is symmetric.
class HamiltonianMatrix {
 public:
  explicit HamiltonianMatrix(Mat h);

  const Mat& matrix() const { return h_; }
  Eigen::Index half_dim() const { return h_.rows() / 2; }

 private:
  Mat h_;
};

/// Standard symplectic form J = [[0, I], [-I, 0]] of size 2n.
Mat symplectic_form(Eigen::Index n);

/// A = Jf_i(0), Q = 1/2 Hess F_i(0), R = 1/2 Hess G_i*(0) per subsystem.
std::vector<LatentSubsystem> linearize(const ProblemSpec& problem);

HamiltonianMatrix build_hamiltonian_matrix(const LatentSubsystem& sub);

/// e^{M t} via scaling and squaring with a degree-13 Pade approximant.
Mat matrix_exponential(const Mat& m, double t);

/// Initial costate q0 with [I 0] e^{HT} (x0, q0) = xT. `subsystem` only
/// labels the error message.
Vec solve_initial_costate(const HamiltonianMatrix& h, const Vec& x0, const Vec& xT, double horizon,
                          int subsystem = 0);

/// Latent states and costates on the grid t_k = k T / steps, rows = nodes.
struct LatentTrajectory {
  Vec times;
  Mat y;
  Mat q;
  Mat ydot;
  Mat qdot;
  std::vector<HamiltonianMatrix> blocks;  // one per subsystem

  Eigen::Index nodes() const { return times.size(); }
  Eigen::Index steps() const { return times.size() - 1; }
  Eigen::Index half_dim() const { return y.cols(); }
  double horizon() const { return times(times.size() - 1); }
  double step() const { return horizon() / static_cast<double>(steps()); }
  /// Stacked (y, q) at node k.
  Vec phase(Eigen::Index k) const;
  /// Stacked (ydot, qdot) at node k.
  Vec velocity(Eigen::Index k) const;
};

/// Closed-form latent solution of the two-point problem. Each subsystem is
/// solved independently; the terminal node's state is pinned to xT once
/// the boundary residual is verified below `boundary_tol`.
LatentTrajectory latent_trajectory(const std::vector<HamiltonianMatrix>& blocks, const Vec& x0,
                                   const Vec& xT, double horizon, int steps,
                                   double boundary_tol = 1e-8);

/// Convenience: linearize, build blocks and solve for the problem's boundary data.
LatentTrajectory solve_latent(const ProblemSpec& problem, int steps);

}  // namespace tsymp
