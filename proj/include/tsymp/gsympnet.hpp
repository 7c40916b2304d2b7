#pragma once

#include "tsymp/time_scale_net.hpp"
#include "tsymp/types.hpp"

#include <random>
#include <vector>

namespace tsymp {

/// Gradient module of a G-SympNet.
///   up:  p += K^T (a . sigma(K x + b))
///   low: x += K^T (a . sigma(K p + b))
struct GLayer {
  enum class Kind { up, low };
  Mat K;
  Vec a;
  Vec b;
  Kind kind = Kind::up;
};

/// Time-independent symplectic network with elementwise activation.
/// Each module is a shear, so the inverse is explicit.
class GSympNet {
 public:
  GSympNet(int half_dim, std::vector<GLayer> layers, Activation activation);

  /// Alternating up/low modules with K, a ~ N(0, 1/width), b ~ N(0, 1).
  static GSympNet make(int half_dim, int pairs, int width, Activation activation, std::mt19937_64& rng);

  Vec forward(const Vec& z) const;
  Vec inverse(const Vec& z) const;

  int half_dim() const { return n_; }
  const std::vector<GLayer>& layers() const { return layers_; }

 private:
  Vec shear(const GLayer& layer, const Vec& src) const;

  int n_;
  std::vector<GLayer> layers_;
  Activation activation_;
};

}  // namespace tsymp
