#pragma once

#include "tsymp/types.hpp"

namespace tsymp {

struct AdamConfig {
  double step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// First/second moment state for one parameter vector.
class Adam {
 public:
  Adam(Eigen::Index size, AdamConfig config);

  /// theta -= step * m_hat / (sqrt(v_hat) + epsilon)
  void step(Vec& theta, const Vec& grad);
  void reset();

  const Vec& first_moment() const { return m_; }
  const Vec& second_moment() const { return v_; }
  long steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  Vec m_, v_;
  long t_ = 0;
};

}  // namespace tsymp
