#include "tsymp/time_scale_net.hpp"

#include <cmath>

namespace tsymp {

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw SolverError("unknown activation '" + name + "'");
}

std::string to_string(Activation activation) {
  return activation == Activation::tanh ? "tanh" : "sigmoid";
}

namespace {

// sigma, sigma', sigma'' evaluated elementwise.
struct ActivationValues {
  Vec f, d1, d2;
};

ActivationValues activate(Activation kind, const Vec& z) {
  ActivationValues out;
  if (kind == Activation::tanh) {
    out.f = z.array().tanh();
    out.d1 = 1.0 - out.f.array().square();
    out.d2 = -2.0 * out.f.array() * out.d1.array();
  } else {
    out.f = 1.0 / (1.0 + (-z.array()).exp());
    out.d1 = out.f.array() * (1.0 - out.f.array());
    out.d2 = out.d1.array() * (1.0 - 2.0 * out.f.array());
  }
  return out;
}

}  // namespace

TimeScaleNet TimeScaleNet::make(const Shape& shape, double input_scale, std::mt19937_64& rng) {
  if (shape.sublayers < 0 || shape.subwidth < 1 || shape.width < 1)
    throw SolverError("time-scale net: invalid shape");
  TimeScaleNet net;
  net.shape_ = shape;
  net.input_scale_ = input_scale;
  int fan_in = 1;
  for (int layer = 0; layer < shape.sublayers; ++layer) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    Mat w(shape.subwidth, fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(Vec::Zero(shape.subwidth));
    fan_in = shape.subwidth;
  }
  net.weights_.push_back(Mat::Zero(shape.width, fan_in));
  net.biases_.push_back(Vec::Zero(shape.width));
  return net;
}

TimeScaleNet TimeScaleNet::zeros_like() const {
  TimeScaleNet g = *this;
  for (auto& w : g.weights_) w.setZero();
  for (auto& b : g.biases_) b.setZero();
  return g;
}

TimeScaleNet::Eval TimeScaleNet::evaluate(double t) const {
  Eval e;
  Vec h = Vec::Constant(1, t * input_scale_);
  Vec dh = Vec::Constant(1, input_scale_);
  const auto last = weights_.size() - 1;
  for (std::size_t layer = 0; layer < last; ++layer) {
    e.h.push_back(h);
    e.dh.push_back(dh);
    const Vec z = weights_[layer] * h + biases_[layer];
    const Vec dz = weights_[layer] * dh;
    const auto act = activate(shape_.activation, z);
    h = act.f;
    dh = act.d1.cwiseProduct(dz);
  }
  e.h.push_back(h);
  e.dh.push_back(dh);
  e.value = weights_[last] * h + biases_[last];
  e.rate = weights_[last] * dh;
  return e;
}

void TimeScaleNet::backward(const Eval& e, const Vec& value_adj, const Vec& rate_adj,
                            TimeScaleNet& grad) const {
  const auto last = weights_.size() - 1;
  grad.weights_[last].noalias() += value_adj * e.h[last].transpose() + rate_adj * e.dh[last].transpose();
  grad.biases_[last] += value_adj;
  Vec h_adj = weights_[last].transpose() * value_adj;
  Vec dh_adj = weights_[last].transpose() * rate_adj;
  for (std::size_t layer = last; layer-- > 0;) {
    // Recompute the pre-activation of this layer from its stored input.
    const Vec z = weights_[layer] * e.h[layer] + biases_[layer];
    const Vec dz = weights_[layer] * e.dh[layer];
    const auto act = activate(shape_.activation, z);
    const Vec dz_adj = dh_adj.cwiseProduct(act.d1);
    const Vec z_adj = h_adj.cwiseProduct(act.d1) + dh_adj.cwiseProduct(dz).cwiseProduct(act.d2);
    grad.weights_[layer].noalias() += z_adj * e.h[layer].transpose() + dz_adj * e.dh[layer].transpose();
    grad.biases_[layer] += z_adj;
    h_adj = weights_[layer].transpose() * z_adj;
    dh_adj = weights_[layer].transpose() * dz_adj;
  }
}

Eigen::Index TimeScaleNet::parameter_count() const {
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) n += weights_[i].size() + biases_[i].size();
  return n;
}

}  // namespace tsymp
