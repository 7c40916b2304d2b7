#pragma once

#include "tsymp/types.hpp"

#include <random>
#include <string>
#include <vector>

namespace tsymp {

enum class Activation { tanh, sigmoid };

Activation parse_activation(const std::string& name);
std::string to_string(Activation activation);

/// Small fully connected network t -> a(t) in R^width. Hidden layers use a
/// smooth activation; the output layer is affine. Evaluation also returns
/// da/dt, which the time derivative of the symplectic map needs.
class TimeScaleNet {
 public:
  struct Shape {
    int sublayers = 2;  // hidden layers
    int subwidth = 16;
    int width = 16;     // output dimension l
    Activation activation = Activation::tanh;
  };

  /// Forward record kept for the reverse sweep.
  struct Eval {
    Vec value;               // a(t)
    Vec rate;                // a'(t)
    std::vector<Vec> h;      // layer inputs, h[0] = scaled t
    std::vector<Vec> dh;     // d h / dt
  };

  TimeScaleNet() = default;

  /// Hidden weights ~ N(0, 1/fan_in), biases 0, output layer zero so that
  /// a(t) == 0 initially. `input_scale` maps t into the network input.
  static TimeScaleNet make(const Shape& shape, double input_scale, std::mt19937_64& rng);
  /// Same shape with every weight zero (gradient accumulator).
  TimeScaleNet zeros_like() const;

  Eval evaluate(double t) const;

  /// Accumulates d(loss)/d(weights) into `grad` given adjoints of a(t) and a'(t).
  void backward(const Eval& eval, const Vec& value_adj, const Vec& rate_adj,
                TimeScaleNet& grad) const;

  const Shape& shape() const { return shape_; }
  double input_scale() const { return input_scale_; }
  std::vector<Mat>& weights() { return weights_; }
  std::vector<Vec>& biases() { return biases_; }
  const std::vector<Mat>& weights() const { return weights_; }
  const std::vector<Vec>& biases() const { return biases_; }

  Eigen::Index parameter_count() const;

 private:
  Shape shape_;
  double input_scale_ = 1.0;
  std::vector<Mat> weights_;  // sublayers + 1 layers
  std::vector<Vec> biases_;
};

}  // namespace tsymp
