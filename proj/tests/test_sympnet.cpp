#include "support.hpp"
#include "tsymp/checkpoint.hpp"
#include "tsymp/gsympnet.hpp"
#include "tsymp/sympnet.hpp"

#include <doctest.h>

#include <sstream>

using namespace tsymp;
using testing::Gen;

namespace {

// Time net with a(t) == value for every t.
TimeScaleNet constant_net(const Vec& value, std::mt19937_64& rng) {
  TimeScaleNet::Shape shape;
  shape.sublayers = 1;
  shape.subwidth = 3;
  shape.width = static_cast<int>(value.size());
  TimeScaleNet a = TimeScaleNet::make(shape, 1.0, rng);
  a.weights().back().setZero();
  a.biases().back() = value;
  return a;
}

TlSympNet random_net(int n, int pairs, int width, double T, Gen& g, bool boundary = true) {
  TlSympNet::Config c;
  c.half_dim = n;
  c.horizon = T;
  c.pairs = pairs;
  c.width = width;
  c.sublayers = 2;
  c.subwidth = 8;
  c.boundary_preserving = boundary;
  TlSympNet net = TlSympNet::make(c, g.engine());
  Vec theta = net.flatten();
  theta += g.vec(theta.size(), 0.3);
  net.unflatten(theta);
  return net;
}

}  // namespace

TEST_CASE("G-SympNet: zero amplitudes give the identity") {
  Gen g(51);
  GSympNet net = GSympNet::make(2, 2, 4, Activation::tanh, g.engine());
  std::vector<GLayer> layers = net.layers();
  for (auto& l : layers) l.a.setZero();
  const GSympNet zero(2, layers, Activation::tanh);
  const Vec z = g.vec(4);
  CHECK(zero.forward(z) == z);
}

TEST_CASE("G-SympNet: sigmoid up layer hand case") {
  GLayer layer{Mat::Ones(1, 1), Vec::Ones(1), Vec::Zero(1), GLayer::Kind::up};
  const GSympNet net(1, {layer}, Activation::sigmoid);
  const Vec out = net.forward(Vec::Zero(2));
  CHECK(out(0) == 0.0);
  CHECK(out(1) == doctest::Approx(0.5));
}

TEST_CASE("G-SympNet: inverse round trip") {
  Gen g(52);
  for (int trial = 0; trial < 50; ++trial) {
    const GSympNet net = GSympNet::make(g.integer(1, 4), g.integer(1, 3), 8, Activation::tanh, g.engine());
    const Vec z = g.vec(2 * net.half_dim());
    CHECK((net.inverse(net.forward(z)) - z).norm() < 1e-10);
  }
}

TEST_CASE("TL-SympNet: fresh network is the identity") {
  Gen g(53);
  TlSympNet::Config c;
  c.half_dim = 3;
  c.horizon = 2.0;
  const TlSympNet net = TlSympNet::make(c, g.engine());
  const Vec z = g.vec(6), v = g.vec(6);
  CHECK(net.forward(z, 0.7) == z);
  CHECK(net.jacobian_vp(z, 0.7, v) == v);
  CHECK(net.time_derivative(z, 0.7).isZero());
  CHECK(net.symplecticity_defect(z, 0.7) == 0.0);
}

TEST_CASE("TL-SympNet: one low layer hand case") {
  std::mt19937_64 rng(1);
  ShearLayer layer{Mat::Constant(1, 1, 2.0), Vec::Ones(1), constant_net(Vec::Constant(1, 0.5), rng), ShearKind::low};
  const TlSympNet net(1, 1.0, {layer});
  Vec z(2);
  z << 1, 0;
  const Vec out = net.forward(z, 0.5);
  CHECK(out(0) == 1.0);
  CHECK(out(1) == doctest::Approx(3.0));
  // Jac = [[1, 0], [K^T a K, 1]] = [[1, 0], [2, 1]].
  const Mat J = net.jacobian(0.5);
  CHECK(J(0, 0) == 1.0);
  CHECK(J(0, 1) == 0.0);
  CHECK(J(1, 0) == doctest::Approx(2.0));
  CHECK(J(1, 1) == 1.0);
  Vec v(2);
  v << 1, 1;
  CHECK(net.jacobian_vp(z, 0.5, v).isApprox(J * v));
  CHECK(net.time_derivative(z, 0.5).isZero());
}

TEST_CASE("TL-SympNet: low layer Jacobian block formula for random K") {
  Gen g(54);
  std::mt19937_64 rng(2);
  const int n = 3, l = 4;
  const Mat K = g.mat(l, n);
  const Vec a = g.vec(l);
  ShearLayer layer{K, g.vec(l), constant_net(a, rng), ShearKind::low};
  const TlSympNet net(n, 1.0, {layer});
  Mat expected = Mat::Identity(2 * n, 2 * n);
  expected.bottomLeftCorner(n, n) = K.transpose() * a.asDiagonal() * K;
  CHECK((net.jacobian(0.3) - expected).norm() < 1e-12);
}

TEST_CASE("TL-SympNet: composed affine layers equal forward") {
  Gen g(55);
  const TlSympNet net = random_net(3, 2, 5, 2.0, g);
  for (int trial = 0; trial < 100; ++trial) {
    const double t = g.uniform(0.0, 2.0);
    Vec z = g.vec(6);
    const Vec direct = net.forward(z, t);
    for (const auto& m : net.affine_layers(t)) z = m.M * z + m.c;
    CHECK((z - direct).norm() < 1e-10 * std::max(1.0, direct.norm()));
  }
}

TEST_CASE("boundary-preserving net fixes x at t = 0 and t = T") {
  Gen g(56);
  for (int trial = 0; trial < 20; ++trial) {
    const double T = g.uniform(0.5, 10.0);
    const TlSympNet net = random_net(g.integer(1, 4), g.integer(1, 3), 6, T, g);
    const int n = net.half_dim();
    const Vec z = g.vec(2 * n);
    CHECK(net.forward(z, 0.0).head(n) == z.head(n));
    CHECK(net.forward(z, T).head(n) == z.head(n));
  }
}

TEST_CASE("boundary gate at T/2 equals an ungated layer with a scaled by T^2/4") {
  std::mt19937_64 rng(3);
  Gen g(57);
  const double T = 3.0;
  const Mat K = g.mat(2, 2);
  const Vec b = g.vec(2), a = g.vec(2);
  const TlSympNet gated(2, T, {ShearLayer{K, b, constant_net(a, rng), ShearKind::up_boundary}});
  const TlSympNet plain(2, T, {ShearLayer{K, b, constant_net(a * T * T / 4, rng), ShearKind::up}});
  const Vec z = g.vec(4);
  CHECK((gated.forward(z, T / 2) - plain.forward(z, T / 2)).norm() < 1e-13);
}

TEST_CASE("time derivative at t = 0 comes only from the gate slope") {
  std::mt19937_64 rng(4);
  Gen g(58);
  const double T = 2.0;
  const Mat K = g.mat(3, 2);
  const Vec b = g.vec(3), a = g.vec(3);
  const TlSympNet net(2, T, {ShearLayer{K, b, constant_net(a, rng), ShearKind::up_boundary}});
  const Vec z = g.vec(4);
  Vec expected = Vec::Zero(4);
  expected.head(2) = K.transpose() * (T * a.array() * (K * z.tail(2) + b).array()).matrix();
  CHECK((net.time_derivative(z, 0.0) - expected).norm() < 1e-12);
}

TEST_CASE("jacobian_vp and time_derivative vs differences") {
  Gen g(59);
  for (int trial = 0; trial < 30; ++trial) {
    const double T = g.uniform(0.5, 5.0);
    const TlSympNet net = random_net(g.integer(1, 4), g.integer(1, 3), 6, T, g);
    const int n = net.half_dim();
    const Vec z = g.vec(2 * n), v = g.vec(2 * n);
    const double t = g.uniform(0.1 * T, 0.9 * T);
    const double h = 1e-5;
    const Vec fd_v = (net.forward(z + h * v, t) - net.forward(z - h * v, t)) / (2 * h);
    CHECK(testing::rel_error(net.jacobian_vp(z, t, v), fd_v) < 1e-6);
    const Vec fd_t = (net.forward(z, t + h) - net.forward(z, t - h)) / (2 * h);
    CHECK(testing::rel_error(net.time_derivative(z, t), fd_t) < 1e-6);
  }
}

TEST_CASE("symplecticity defect stays at rounding level") {
  Gen g(60);
  for (int pairs : {1, 2, 5})
    for (int width : {4, 16}) {
      const TlSympNet net = random_net(3, pairs, width, 4.0, g);
      double worst = 0.0;
      for (int k = 0; k < 20; ++k) worst = std::max(worst, net.symplecticity_defect(g.vec(6), g.uniform(0.0, 4.0)));
      CHECK(worst <= 1e-10);
    }
}

TEST_CASE("a corrupted shear is detected") {
  Gen g(61);
  const int n = 2;
  const Mat K1 = g.mat(3, n), K2 = K1 + g.mat(3, n);
  Mat G = Mat::Identity(2 * n, 2 * n);
  G.bottomLeftCorner(n, n) = K1.transpose() * K2;  // not symmetric
  CHECK(symplecticity_defect(G) > 0.1);
  G.bottomLeftCorner(n, n) = K1.transpose() * K1;
  CHECK(symplecticity_defect(G) < 1e-12);
}

TEST_CASE("times outside [0, T] are rejected") {
  Gen g(62);
  const TlSympNet net = random_net(2, 1, 4, 1.0, g);
  CHECK_THROWS_AS(net.forward(Vec::Zero(4), -0.1), SolverError);
  CHECK_THROWS_AS(net.forward(Vec::Zero(4), 1.1), SolverError);
}

TEST_CASE("flatten / unflatten round trip") {
  Gen g(63);
  TlSympNet net = random_net(3, 2, 5, 1.0, g);
  const Vec theta = net.flatten();
  CHECK(theta.size() == net.parameter_count());
  TlSympNet copy = net.zeros_like();
  CHECK(copy.flatten().isZero());
  copy.unflatten(theta);
  CHECK(copy.flatten() == theta);
  const Vec z = g.vec(6);
  CHECK(copy.forward(z, 0.4) == net.forward(z, 0.4));
}

TEST_CASE("tape gradient of a quadratic output loss vs differences") {
  Gen g(64);
  for (int trial = 0; trial < 5; ++trial) {
    const TlSympNet net = random_net(2, trial % 2 + 1, 4, 2.0, g);
    const Vec z = g.vec(4), v = g.vec(4), w1 = g.vec(4), w2 = g.vec(4), w3 = g.vec(4);
    const double t = g.uniform(0.2, 1.8);
    // loss = 1/2 |value|^2 + <w1, value> + <w2, jvp> + <w3, rate>
    auto loss = [&](const TlSympNet& m) {
      const Vec val = m.forward(z, t);
      return 0.5 * val.squaredNorm() + w1.dot(val) + w2.dot(m.jacobian_vp(z, t, v)) + w3.dot(m.time_derivative(z, t));
    };
    SympNetTape tape(net);
    const auto point = tape.add_point(tape.add_time(t), z, v);
    const auto& out = tape.output(point);
    tape.seed(point, out.value + w1, w2, w3);
    const Vec analytic = tape.gradient().flatten();
    TlSympNet probe = net;
    const Vec theta = net.flatten();
    const Vec fd = testing::fd_gradient(
        [&](const Vec& th) {
          probe.unflatten(th);
          return loss(probe);
        },
        theta, 1e-6);
    CHECK(testing::rel_error(analytic, fd) < 1e-5);
  }
}

TEST_CASE("parameters with no influence get zero gradient") {
  Gen g(65);
  TlSympNet net = random_net(2, 1, 4, 2.0, g);
  // Zero the first layer's time-net output so its K cannot matter.
  auto& a = net.mutable_layers()[0].a;
  a.weights().back().setZero();
  a.biases().back().setZero();
  SympNetTape tape(net);
  const auto p = tape.add_point(tape.add_time(0.7), g.vec(4), g.vec(4));
  tape.seed(p, g.vec(4), g.vec(4), g.vec(4));
  const TlSympNet grad = tape.gradient();
  CHECK(grad.layers()[0].K.isZero());
  CHECK(grad.layers()[0].b.isZero());
}

TEST_CASE("a tape goes stale when the net changes") {
  Gen g(66);
  TlSympNet net = random_net(2, 1, 4, 2.0, g);
  SympNetTape tape(net);
  tape.add_point(tape.add_time(0.5), g.vec(4), g.vec(4));
  net.unflatten(net.flatten());
  CHECK_THROWS_AS(tape.gradient(), SolverError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Gen g(67);
  const TlSympNet net = random_net(3, 2, 5, 1.7, g);
  std::stringstream buf;
  save_checkpoint(net, buf);
  const TlSympNet back = load_checkpoint(buf);
  CHECK(back.flatten() == net.flatten());
  CHECK(back.horizon() == net.horizon());
  CHECK(back.layers().size() == net.layers().size());
  const Vec z = g.vec(6);
  CHECK(back.forward(z, 0.9) == net.forward(z, 0.9));
}

TEST_CASE("malformed checkpoints are rejected") {
  std::stringstream bad("tsympnet 1\nhalf_dim two\n");
  CHECK_THROWS(load_checkpoint(bad));
}
