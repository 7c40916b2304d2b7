#include "tsymp/gsympnet.hpp"

#include <cmath>

namespace tsymp {

GSympNet::GSympNet(int half_dim, std::vector<GLayer> layers, Activation activation)
    : n_(half_dim), layers_(std::move(layers)), activation_(activation) {
  if (n_ < 1) throw SolverError("gsympnet: half dimension must be positive");
  for (const auto& layer : layers_) {
    const auto l = layer.K.rows();
    if (layer.K.cols() != n_ || layer.a.size() != l || layer.b.size() != l)
      throw SolverError("gsympnet: layer shapes are inconsistent");
  }
}

GSympNet GSympNet::make(int half_dim, int pairs, int width, Activation activation, std::mt19937_64& rng) {
  std::normal_distribution<double> scaled(0.0, 1.0 / std::sqrt(static_cast<double>(width)));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<GLayer> layers;
  for (int i = 0; i < 2 * pairs; ++i) {
    GLayer layer;
    layer.kind = i % 2 == 0 ? GLayer::Kind::up : GLayer::Kind::low;
    layer.K.resize(width, half_dim);
    layer.a.resize(width);
    layer.b.resize(width);
    for (Eigen::Index k = 0; k < layer.K.size(); ++k) layer.K.data()[k] = scaled(rng);
    for (Eigen::Index k = 0; k < width; ++k) {
      layer.a(k) = scaled(rng);
      layer.b(k) = unit(rng);
    }
    layers.push_back(std::move(layer));
  }
  return GSympNet(half_dim, std::move(layers), activation);
}

Vec GSympNet::shear(const GLayer& layer, const Vec& src) const {
  const Vec pre = layer.K * src + layer.b;
  Vec act(pre.size());
  if (activation_ == Activation::tanh)
    act = pre.array().tanh();
  else
    act = 1.0 / (1.0 + (-pre.array()).exp());
  return layer.K.transpose() * layer.a.cwiseProduct(act);
}

Vec GSympNet::forward(const Vec& z) const {
  if (z.size() != 2 * n_) throw SolverError("gsympnet: phase dimension mismatch");
  Vec out = z;
  for (const auto& layer : layers_) {
    if (layer.kind == GLayer::Kind::up)
      out.tail(n_) += shear(layer, out.head(n_));
    else
      out.head(n_) += shear(layer, out.tail(n_));
  }
  return out;
}

Vec GSympNet::inverse(const Vec& z) const {
  if (z.size() != 2 * n_) throw SolverError("gsympnet: phase dimension mismatch");
  Vec out = z;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    if (it->kind == GLayer::Kind::up)
      out.tail(n_) -= shear(*it, out.head(n_));
    else
      out.head(n_) -= shear(*it, out.tail(n_));
  }
  return out;
}

}  // namespace tsymp
