#include "tsymp/adam.hpp"

#include <cmath>

namespace tsymp {

void AdamConfig::validate() const {
  if (!(step > 0.0)) throw SolverError("adam: step size must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw SolverError("adam: betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw SolverError("adam: epsilon must be positive");
}

Adam::Adam(Eigen::Index size, AdamConfig config)
    : config_(config), m_(Vec::Zero(size)), v_(Vec::Zero(size)) {
  config_.validate();
}

void Adam::reset() {
  m_.setZero();
  v_.setZero();
  t_ = 0;
}

void Adam::step(Vec& theta, const Vec& grad) {
  if (theta.size() != m_.size() || grad.size() != m_.size())
    throw SolverError("adam: parameter size mismatch");
  ++t_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  theta.array() -= config_.step * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.epsilon);
}

}  // namespace tsymp
