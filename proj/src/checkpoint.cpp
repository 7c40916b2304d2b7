#include "tsymp/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tsymp {

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw SolverError("checkpoint: bad number '" + token + "'");
  return v;
}

const char* kind_name(ShearKind kind) {
  switch (kind) {
    case ShearKind::low: return "low";
    case ShearKind::up: return "up";
    case ShearKind::up_boundary: return "up_boundary";
  }
  return "?";
}

ShearKind parse_kind(const std::string& name) {
  if (name == "low") return ShearKind::low;
  if (name == "up") return ShearKind::up;
  if (name == "up_boundary") return ShearKind::up_boundary;
  throw SolverError("checkpoint: unknown layer kind '" + name + "'");
}

void write_tensor(std::ostream& out, const std::string& name, const Mat& m) {
  out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << hex(m(r, c));
    out << '\n';
  }
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word)
    throw SolverError("checkpoint: expected '" + word + "', found '" + got + "'");
}

Mat read_tensor(std::istream& in, const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  expect(in, "tensor");
  expect(in, name);
  Eigen::Index r = -1, c = -1;
  if (!(in >> r >> c) || r != rows || c != cols) {
    std::ostringstream msg;
    msg << "checkpoint: tensor " << name << " has shape " << r << "x" << c << ", expected " << rows << "x"
        << cols;
    throw SolverError(msg.str());
  }
  Mat m(rows, cols);
  std::string token;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> token)) throw SolverError("checkpoint: truncated tensor " + name);
      m(i, j) = parse_hex(token);
    }
  }
  return m;
}

}  // namespace

void save_checkpoint(const TlSympNet& net, std::ostream& out) {
  out << "tsympnet 1\n";
  out << "half_dim " << net.half_dim() << '\n';
  out << "horizon " << hex(net.horizon()) << '\n';
  out << "layers " << net.layers().size() << '\n';
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& layer = net.layers()[i];
    const auto& shape = layer.a.shape();
    out << "layer " << i << ' ' << kind_name(layer.kind) << ' ' << layer.K.rows() << ' ' << shape.sublayers
        << ' ' << shape.subwidth << ' ' << to_string(shape.activation) << ' ' << hex(layer.a.input_scale())
        << '\n';
    const std::string prefix = "layer" + std::to_string(i) + ".";
    write_tensor(out, prefix + "K", layer.K);
    write_tensor(out, prefix + "b", layer.b);
    for (std::size_t k = 0; k < layer.a.weights().size(); ++k) {
      write_tensor(out, prefix + "a.W" + std::to_string(k), layer.a.weights()[k]);
      write_tensor(out, prefix + "a.c" + std::to_string(k), layer.a.biases()[k]);
    }
  }
}

TlSympNet load_checkpoint(std::istream& in) {
  expect(in, "tsympnet");
  expect(in, "1");
  int n = 0;
  std::string token;
  std::size_t count = 0;
  expect(in, "half_dim");
  in >> n;
  expect(in, "horizon");
  in >> token;
  const double horizon = parse_hex(token);
  expect(in, "layers");
  in >> count;
  if (!in) throw SolverError("checkpoint: malformed header");
  std::vector<ShearLayer> layers;
  std::mt19937_64 unused(0);
  for (std::size_t i = 0; i < count; ++i) {
    expect(in, "layer");
    std::size_t index = 0;
    std::string kind, activation, scale;
    TimeScaleNet::Shape shape;
    in >> index >> kind >> shape.width >> shape.sublayers >> shape.subwidth >> activation >> scale;
    if (!in || index != i) throw SolverError("checkpoint: malformed layer header");
    shape.activation = parse_activation(activation);
    ShearLayer layer;
    layer.kind = parse_kind(kind);
    layer.a = TimeScaleNet::make(shape, parse_hex(scale), unused);
    const std::string prefix = "layer" + std::to_string(i) + ".";
    layer.K = read_tensor(in, prefix + "K", shape.width, n);
    layer.b = read_tensor(in, prefix + "b", shape.width, 1);
    for (std::size_t k = 0; k < layer.a.weights().size(); ++k) {
      auto& w = layer.a.weights()[k];
      auto& c = layer.a.biases()[k];
      w = read_tensor(in, prefix + "a.W" + std::to_string(k), w.rows(), w.cols());
      c = read_tensor(in, prefix + "a.c" + std::to_string(k), c.size(), 1);
    }
    layers.push_back(std::move(layer));
  }
  return TlSympNet(n, horizon, std::move(layers));
}

void save_checkpoint_file(const TlSympNet& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot write checkpoint " + path);
  save_checkpoint(net, out);
}

TlSympNet load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SolverError("cannot read checkpoint " + path);
  return load_checkpoint(in);
}

}  // namespace tsymp
