#pragma once

#include "tsymp/time_scale_net.hpp"
#include "tsymp/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace tsymp {

/// Which half of the phase vector z = (x, p) a shear layer updates.
enum class ShearKind {
  low,          // p += K^T (a(t) . (K x + b))
  up,           // x += K^T (a(t) . (K p + b))
  up_boundary,  // x += K^T (t (T - t) a(t) . (K p + b)), fixes x at t = 0, T
};

enum class LayerOrder { up_first, low_first };

struct ShearLayer {
  Mat K;  // l x n
  Vec b;  // l
  TimeScaleNet a;
  ShearKind kind = ShearKind::low;
};

/// Time-dependent symplectic map built from alternating shear layers.
/// For fixed t every layer is affine in z, hence so is the whole map.
/// Layers are stored in application order (layers()[0] acts first).
class TlSympNet {
 public:
  struct Config {
    int half_dim = 1;      // n
    double horizon = 1.0;  // T
    int pairs = 2;         // N
    int width = 16;        // l
    int sublayers = 2;
    int subwidth = 16;
    Activation activation = Activation::tanh;
    LayerOrder order = LayerOrder::up_first;
    bool boundary_preserving = true;
  };

  /// Per-time layer coefficients c_i(t) = g_i(t) a_i(t) and their t-derivatives.
  struct Coefficients {
    double t = 0.0;
    std::vector<TimeScaleNet::Eval> evals;
    std::vector<Vec> c;
    std::vector<Vec> c_rate;
  };

  struct LayerTrace {
    Vec src, dsrc, tsrc;
    Vec s, ds, ts;
  };

  /// Value phi_t(z), Jacobian-vector product Jac(phi_t) v, and d/dt phi_t(z).
  struct Output {
    Vec value;
    Vec jvp;
    Vec rate;
  };

  /// z -> M z + c, one per layer at a fixed time.
  struct AffineMap {
    Mat M;
    Vec c;
  };

  TlSympNet() = default;
  TlSympNet(int half_dim, double horizon, std::vector<ShearLayer> layers);

  /// K ~ N(0, 1/l), b = 0, time nets output zero: the identity map.
  static TlSympNet make(const Config& config, std::mt19937_64& rng);

  TlSympNet zeros_like() const;

  Vec forward(const Vec& z, double t) const;
  Vec jacobian_vp(const Vec& z, double t, const Vec& v) const;
  Vec time_derivative(const Vec& z, double t) const;
  /// Phase-space Jacobian at time t (independent of z).
  Mat jacobian(double t) const;
  std::vector<AffineMap> affine_layers(double t) const;
  /// ||Jac^T J Jac - J||_inf from the assembled layer Jacobians.
  double symplecticity_defect(const Vec& z, double t) const;

  Coefficients coefficients(double t) const;
  Output propagate(const Coefficients& coeffs, const Vec& z, const Vec& v,
                   std::vector<LayerTrace>* trace = nullptr) const;

  int half_dim() const { return n_; }
  double horizon() const { return horizon_; }
  bool boundary_preserving() const;
  const std::vector<ShearLayer>& layers() const { return layers_; }
  /// Mutable access bumps the revision so that outstanding tapes go stale.
  std::vector<ShearLayer>& mutable_layers();

  Eigen::Index parameter_count() const;
  Vec flatten() const;
  void unflatten(const Vec& theta);
  std::uint64_t revision() const { return revision_; }

 private:
  void check_time(double t) const;

  int n_ = 0;
  double horizon_ = 1.0;
  std::vector<ShearLayer> layers_;
  std::uint64_t revision_ = 0;
};

/// Reverse-mode record of a batch of net evaluations. Points that share a
/// time share one set of time-net evaluations. Seed output adjoints, then
/// call gradient() for d(loss)/d(theta) in the shape of the net.
class SympNetTape {
 public:
  explicit SympNetTape(const TlSympNet& net);

  std::size_t add_time(double t);
  std::size_t add_point(std::size_t time_id, const Vec& z, const Vec& v);
  const TlSympNet::Output& output(std::size_t point) const { return points_.at(point).out; }

  /// Adds to the adjoints of point `point`'s outputs.
  void seed(std::size_t point, const Vec& value_adj, const Vec& jvp_adj, const Vec& rate_adj);

  /// Throws SolverError if the net changed after recording.
  TlSympNet gradient() const;

 private:
  struct Point {
    std::size_t time_id;
    std::vector<TlSympNet::LayerTrace> trace;
    TlSympNet::Output out;
    Vec value_adj, jvp_adj, rate_adj;
  };

  const TlSympNet* net_;
  std::uint64_t revision_;
  std::vector<TlSympNet::Coefficients> times_;
  std::vector<Point> points_;
};

/// ||G^T J G - J||_inf for an explicit 2n x 2n Jacobian.
double symplecticity_defect(const Mat& jacobian);

}  // namespace tsymp
