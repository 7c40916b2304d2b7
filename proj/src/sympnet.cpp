#include "tsymp/sympnet.hpp"

#include "tsymp/latent_lqr.hpp"

#include <cmath>
#include <sstream>

namespace tsymp {

namespace {

// Scale g(t) applied to a layer's time net and its derivative.
struct Gate {
  double g = 1.0;
  double rate = 0.0;
};

Gate gate(ShearKind kind, double t, double horizon) {
  if (kind != ShearKind::up_boundary) return {};
  return {t * (horizon - t), horizon - 2.0 * t};
}

bool updates_p(ShearKind kind) { return kind == ShearKind::low; }

}  // namespace

TlSympNet::TlSympNet(int half_dim, double horizon, std::vector<ShearLayer> layers)
    : n_(half_dim), horizon_(horizon), layers_(std::move(layers)) {
  if (n_ < 1) throw SolverError("sympnet: half dimension must be positive");
  if (!(horizon_ > 0.0)) throw SolverError("sympnet: horizon must be positive");
  for (const auto& layer : layers_) {
    if (layer.K.cols() != n_ || layer.b.size() != layer.K.rows() ||
        layer.a.shape().width != layer.K.rows())
      throw SolverError("sympnet: layer shapes are inconsistent");
  }
}

TlSympNet TlSympNet::make(const Config& config, std::mt19937_64& rng) {
  if (config.pairs < 1 || config.width < 1 || config.half_dim < 1)
    throw SolverError("sympnet: pairs, width and dimension must be positive");
  TimeScaleNet::Shape shape{config.sublayers, config.subwidth, config.width, config.activation};
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(config.width)));
  const ShearKind up = config.boundary_preserving ? ShearKind::up_boundary : ShearKind::up;
  std::vector<ShearLayer> layers;
  for (int pair = 0; pair < config.pairs; ++pair) {
    for (int half = 0; half < 2; ++half) {
      const bool up_now = (half == 0) == (config.order == LayerOrder::up_first);
      ShearLayer layer;
      layer.kind = up_now ? up : ShearKind::low;
      layer.K.resize(config.width, config.half_dim);
      for (Eigen::Index i = 0; i < layer.K.size(); ++i) layer.K.data()[i] = normal(rng);
      layer.b = Vec::Zero(config.width);
      layer.a = TimeScaleNet::make(shape, 1.0 / config.horizon, rng);
      layers.push_back(std::move(layer));
    }
  }
  return TlSympNet(config.half_dim, config.horizon, std::move(layers));
}

TlSympNet TlSympNet::zeros_like() const {
  TlSympNet g = *this;
  for (auto& layer : g.layers_) {
    layer.K.setZero();
    layer.b.setZero();
    layer.a = layer.a.zeros_like();
  }
  g.revision_ = 0;
  return g;
}

bool TlSympNet::boundary_preserving() const {
  bool any = false;
  for (const auto& layer : layers_) {
    if (layer.kind == ShearKind::up) return false;
    any = any || layer.kind == ShearKind::up_boundary;
  }
  return any || layers_.empty();
}

std::vector<ShearLayer>& TlSympNet::mutable_layers() {
  ++revision_;
  return layers_;
}

void TlSympNet::check_time(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    std::ostringstream msg;
    msg << "sympnet: time " << t << " outside [0, " << horizon_ << "]";
    throw SolverError(msg.str());
  }
}

TlSympNet::Coefficients TlSympNet::coefficients(double t) const {
  check_time(t);
  Coefficients out;
  out.t = t;
  out.evals.reserve(layers_.size());
  for (const auto& layer : layers_) {
    auto e = layer.a.evaluate(t);
    const Gate g = gate(layer.kind, t, horizon_);
    out.c.push_back(g.g * e.value);
    out.c_rate.push_back(g.rate * e.value + g.g * e.rate);
    out.evals.push_back(std::move(e));
  }
  return out;
}

TlSympNet::Output TlSympNet::propagate(const Coefficients& coeffs, const Vec& z, const Vec& v,
                                       std::vector<LayerTrace>* trace) const {
  if (z.size() != 2 * n_ || v.size() != 2 * n_) throw SolverError("sympnet: phase dimension mismatch");
  Output out{z, v, Vec::Zero(2 * n_)};
  if (trace) trace->clear();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    const Eigen::Index src_off = updates_p(layer.kind) ? 0 : n_;
    const Eigen::Index dst_off = updates_p(layer.kind) ? n_ : 0;
    const auto& c = coeffs.c[i];
    const auto& cr = coeffs.c_rate[i];
    Vec s = layer.K * out.value.segment(src_off, n_) + layer.b;
    Vec ds = layer.K * out.jvp.segment(src_off, n_);
    Vec ts = layer.K * out.rate.segment(src_off, n_);
    if (trace) {
      trace->push_back({out.value.segment(src_off, n_), out.jvp.segment(src_off, n_),
                        out.rate.segment(src_off, n_), s, ds, ts});
    }
    out.value.segment(dst_off, n_).noalias() += layer.K.transpose() * c.cwiseProduct(s);
    out.jvp.segment(dst_off, n_).noalias() += layer.K.transpose() * c.cwiseProduct(ds);
    out.rate.segment(dst_off, n_).noalias() +=
        layer.K.transpose() * (cr.cwiseProduct(s) + c.cwiseProduct(ts));
  }
  return out;
}

Vec TlSympNet::forward(const Vec& z, double t) const {
  return propagate(coefficients(t), z, Vec::Zero(z.size())).value;
}

Vec TlSympNet::jacobian_vp(const Vec& z, double t, const Vec& v) const {
  return propagate(coefficients(t), z, v).jvp;
}

Vec TlSympNet::time_derivative(const Vec& z, double t) const {
  return propagate(coefficients(t), z, Vec::Zero(z.size())).rate;
}

Mat TlSympNet::jacobian(double t) const {
  const auto coeffs = coefficients(t);
  Mat jac = Mat::Identity(2 * n_, 2 * n_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    const Mat shear = layer.K.transpose() * coeffs.c[i].asDiagonal() * layer.K;
    // Row block dst picks up shear * (row block src).
    const Eigen::Index src_off = updates_p(layer.kind) ? 0 : n_;
    const Eigen::Index dst_off = updates_p(layer.kind) ? n_ : 0;
    const Mat src_rows = jac.middleRows(src_off, n_);
    jac.middleRows(dst_off, n_).noalias() += shear * src_rows;
  }
  return jac;
}

std::vector<TlSympNet::AffineMap> TlSympNet::affine_layers(double t) const {
  const auto coeffs = coefficients(t);
  std::vector<AffineMap> maps;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    const Eigen::Index src_off = updates_p(layer.kind) ? 0 : n_;
    const Eigen::Index dst_off = updates_p(layer.kind) ? n_ : 0;
    AffineMap map{Mat::Identity(2 * n_, 2 * n_), Vec::Zero(2 * n_)};
    map.M.block(dst_off, src_off, n_, n_) = layer.K.transpose() * coeffs.c[i].asDiagonal() * layer.K;
    map.c.segment(dst_off, n_) = layer.K.transpose() * coeffs.c[i].cwiseProduct(layer.b);
    maps.push_back(std::move(map));
  }
  return maps;
}

double TlSympNet::symplecticity_defect(const Vec& z, double t) const {
  if (z.size() != 2 * n_) throw SolverError("sympnet: phase dimension mismatch");
  return tsymp::symplecticity_defect(jacobian(t));
}

Eigen::Index TlSympNet::parameter_count() const {
  Eigen::Index count = 0;
  for (const auto& layer : layers_) count += layer.K.size() + layer.b.size() + layer.a.parameter_count();
  return count;
}

Vec TlSympNet::flatten() const {
  Vec theta(parameter_count());
  Eigen::Index at = 0;
  auto put = [&](const auto& m) {
    theta.segment(at, m.size()) = Eigen::Map<const Vec>(m.data(), m.size());
    at += m.size();
  };
  for (const auto& layer : layers_) {
    put(layer.K);
    put(layer.b);
    for (std::size_t k = 0; k < layer.a.weights().size(); ++k) {
      put(layer.a.weights()[k]);
      put(layer.a.biases()[k]);
    }
  }
  return theta;
}

void TlSympNet::unflatten(const Vec& theta) {
  if (theta.size() != parameter_count()) {
    std::ostringstream msg;
    msg << "sympnet: parameter vector has " << theta.size() << " entries, expected " << parameter_count();
    throw SolverError(msg.str());
  }
  ++revision_;
  Eigen::Index at = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Vec>(m.data(), m.size()) = theta.segment(at, m.size());
    at += m.size();
  };
  for (auto& layer : layers_) {
    take(layer.K);
    take(layer.b);
    for (std::size_t k = 0; k < layer.a.weights().size(); ++k) {
      take(layer.a.weights()[k]);
      take(layer.a.biases()[k]);
    }
  }
}

double symplecticity_defect(const Mat& jacobian) {
  if (jacobian.rows() != jacobian.cols() || jacobian.rows() % 2 != 0)
    throw SolverError("symplecticity_defect: square even-sized Jacobian required");
  const Mat j = symplectic_form(jacobian.rows() / 2);
  const Mat diff = jacobian.transpose() * j * jacobian - j;
  return diff.cwiseAbs().rowwise().sum().maxCoeff();
}

SympNetTape::SympNetTape(const TlSympNet& net) : net_(&net), revision_(net.revision()) {}

std::size_t SympNetTape::add_time(double t) {
  times_.push_back(net_->coefficients(t));
  return times_.size() - 1;
}

std::size_t SympNetTape::add_point(std::size_t time_id, const Vec& z, const Vec& v) {
  if (time_id >= times_.size()) throw SolverError("sympnet tape: unknown time id");
  Point point;
  point.time_id = time_id;
  point.out = net_->propagate(times_[time_id], z, v, &point.trace);
  const auto dim = z.size();
  point.value_adj = Vec::Zero(dim);
  point.jvp_adj = Vec::Zero(dim);
  point.rate_adj = Vec::Zero(dim);
  points_.push_back(std::move(point));
  return points_.size() - 1;
}

void SympNetTape::seed(std::size_t point, const Vec& value_adj, const Vec& jvp_adj, const Vec& rate_adj) {
  auto& p = points_.at(point);
  p.value_adj += value_adj;
  p.jvp_adj += jvp_adj;
  p.rate_adj += rate_adj;
}

TlSympNet SympNetTape::gradient() const {
  if (net_->revision() != revision_)
    throw SolverError("sympnet tape: the network changed after this tape was recorded");
  const auto& layers = net_->layers();
  const Eigen::Index n = net_->half_dim();
  TlSympNet grad = net_->zeros_like();
  auto& glayers = grad.mutable_layers();

  // Adjoints of c_i and c_i' per recorded time.
  std::vector<std::vector<Vec>> c_adj(times_.size()), cr_adj(times_.size());
  for (std::size_t k = 0; k < times_.size(); ++k) {
    for (const auto& layer : layers) {
      c_adj[k].push_back(Vec::Zero(layer.K.rows()));
      cr_adj[k].push_back(Vec::Zero(layer.K.rows()));
    }
  }

  for (const auto& point : points_) {
    const auto& coeffs = times_[point.time_id];
    Vec U = point.value_adj, DU = point.jvp_adj, TU = point.rate_adj;
    for (std::size_t i = layers.size(); i-- > 0;) {
      const auto& layer = layers[i];
      const auto& tr = point.trace[i];
      const auto& c = coeffs.c[i];
      const auto& cr = coeffs.c_rate[i];
      const Eigen::Index src_off = updates_p(layer.kind) ? 0 : n;
      const Eigen::Index dst_off = updates_p(layer.kind) ? n : 0;
      const Vec e1 = layer.K * U.segment(dst_off, n);
      const Vec e2 = layer.K * DU.segment(dst_off, n);
      const Vec e3 = layer.K * TU.segment(dst_off, n);

      c_adj[point.time_id][i] += e1.cwiseProduct(tr.s) + e2.cwiseProduct(tr.ds) + e3.cwiseProduct(tr.ts);
      cr_adj[point.time_id][i] += e3.cwiseProduct(tr.s);

      const Vec s_adj = e1.cwiseProduct(c) + e3.cwiseProduct(cr);
      const Vec ds_adj = e2.cwiseProduct(c);
      const Vec ts_adj = e3.cwiseProduct(c);

      auto& gK = glayers[i].K;
      gK.noalias() += c.cwiseProduct(tr.s) * U.segment(dst_off, n).transpose();
      gK.noalias() += c.cwiseProduct(tr.ds) * DU.segment(dst_off, n).transpose();
      gK.noalias() += (cr.cwiseProduct(tr.s) + c.cwiseProduct(tr.ts)) * TU.segment(dst_off, n).transpose();
      gK.noalias() += s_adj * tr.src.transpose() + ds_adj * tr.dsrc.transpose() + ts_adj * tr.tsrc.transpose();
      glayers[i].b += s_adj;

      U.segment(src_off, n).noalias() += layer.K.transpose() * s_adj;
      DU.segment(src_off, n).noalias() += layer.K.transpose() * ds_adj;
      TU.segment(src_off, n).noalias() += layer.K.transpose() * ts_adj;
    }
  }

  for (std::size_t k = 0; k < times_.size(); ++k) {
    const double t = times_[k].t;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const Gate g = gate(layers[i].kind, t, net_->horizon());
      const Vec a_adj = g.g * c_adj[k][i] + g.rate * cr_adj[k][i];
      const Vec a_rate_adj = g.g * cr_adj[k][i];
      layers[i].a.backward(times_[k].evals[i], a_adj, a_rate_adj, glayers[i].a);
    }
  }
  return grad;
}

}  // namespace tsymp
