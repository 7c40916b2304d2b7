#pragma once

#include "tsymp/constraints.hpp"
#include "tsymp/penalty.hpp"
#include "tsymp/types.hpp"

#include <optional>
#include <vector>

namespace tsymp {

enum class DynamicsKind {
  single_integrator,  // x' = u
  newtonian_drag,     // w' = v, v' = u - k v s(v)
};

/// Drift f_i and input matrix B_i of one subsystem.
struct SubsystemDynamics {
  DynamicsKind kind = DynamicsKind::newtonian_drag;
  double drag = 0.0;        // k
  double smoothing = 1e-6;  // delta in s(v) = sqrt(|v|^2 + delta^2) - delta
  Mat B;

  static SubsystemDynamics single_integrator(int dim);
  static SubsystemDynamics newtonian(int space_dim, double drag, double smoothing = 1e-6);
};

/// F(x) = 1/2 x^T Phi x and G(u) = 1/2 u^T S u, so G*(z) = 1/2 z^T S^-1 z.
struct QuadraticCost {
  Mat state_weight;    // Phi
  Mat control_weight;  // S, symmetric positive definite
  Mat control_inverse;

  /// Throws SolverError unless S is symmetric positive definite.
  static QuadraticCost make(Mat state_weight, Mat control_weight);
};

struct ProblemSpec {
  int agents = 1;
  int state_dim = 4;    // d_x
  int control_dim = 2;  // d_u
  int space_dim = 2;
  double horizon = 10.0;
  Vec x0;
  Vec xT;
  std::vector<SubsystemDynamics> dynamics;
  std::vector<QuadraticCost> costs;
  std::optional<SwarmGeometry> geometry;
  PenaltyParams penalty;

  void validate() const;
  int dim() const { return agents * state_dim; }
  int control_size() const { return agents * control_dim; }
  /// Stacked agent positions w_1..w_M taken from the state.
  Vec positions(const Vec& x) const;
};

Vec dynamics_f(const ProblemSpec& spec, const Vec& x);

/// H(x,p) = sum_i <p_i, f_i> - F_i + G_i*(B_i^T p_i) - U(h(x)).
double hamiltonian(const ProblemSpec& spec, const Vec& x, const Vec& p);
Vec grad_p_H(const ProblemSpec& spec, const Vec& x, const Vec& p);
Vec grad_x_H(const ProblemSpec& spec, const Vec& x, const Vec& p);

/// Both gradients at once; works for double and Dual scalars.
template <class S>
void hamiltonian_gradient(const ProblemSpec& spec, const VecT<S>& x, const VecT<S>& p,
                          VecT<S>& gx, VecT<S>& gp);

/// Hessian of H applied to (dx, dp); returns the stacked 2n vector.
Vec hamiltonian_hvp(const ProblemSpec& spec, const Vec& x, const Vec& p, const Vec& dx,
                    const Vec& dp);

/// Maximizer of <p, Bu> - G(u): u_i = S_i^-1 B_i^T p_i.
Vec recover_control(const ProblemSpec& spec, const Vec& p);

/// Trapezoidal integral of sum_i F_i(x_i) + G_i(u_i). Rows of `states`
/// and `controls` are grid nodes.
double running_cost(const ProblemSpec& spec, const Vec& times, const Mat& states,
                    const Mat& controls);

}  // namespace tsymp
