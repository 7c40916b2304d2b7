#pragma once

// Forward-mode scalar used to differentiate the Hamiltonian gradient once
// more (Hessian-vector products) without hand-writing second derivatives
// of every constraint shape.

#include <unsupported/Eigen/AutoDiff>

namespace tsymp {

using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.value(); }

inline Dual make_dual(double value, double tangent) {
  Dual d(value);
  d.derivatives()(0) = tangent;
  return d;
}

inline double tangent_of(const Dual& x) { return x.derivatives()(0); }

}  // namespace tsymp
