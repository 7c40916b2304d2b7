#include "tsymp/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace tsymp {

using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- writing

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json mat_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec_json(m.row(r).transpose()));
  return out;
}

std::string order_name(LayerOrder order) { return order == LayerOrder::up_first ? "up_first" : "low_first"; }
std::string norm_name(LossNorm norm) { return norm == LossNorm::euclidean ? "euclidean" : "squared_mean"; }

json obstacle_json(const Obstacle& obstacle) {
  json o;
  if (const auto* c = std::get_if<Circle>(&obstacle)) {
    o["type"] = "circle";
    o["center"] = vec_json(c->center);
    o["radius"] = c->radius;
  } else if (const auto* r = std::get_if<RoomBounds>(&obstacle)) {
    o["type"] = "room";
    o["lo"] = vec_json(r->lo);
    o["hi"] = vec_json(r->hi);
    o["inflate"] = r->inflate;
  } else if (const auto* w = std::get_if<CapsuleWall>(&obstacle)) {
    o["type"] = "capsule";
    o["a"] = vec_json(w->a);
    o["b"] = vec_json(w->b);
    o["thickness"] = w->thickness;
  } else {
    const auto& b = std::get<Box>(obstacle);
    o["type"] = "box";
    o["lo"] = vec_json(b.lo);
    o["hi"] = vec_json(b.hi);
  }
  return o;
}

json problem_json(const ProblemSpec& p) {
  json j;
  j["agents"] = p.agents;
  j["space_dim"] = p.space_dim;
  j["horizon"] = p.horizon;
  const auto& dyn = p.dynamics.front();
  json d;
  if (dyn.kind == DynamicsKind::newtonian_drag) {
    d["type"] = "newtonian";
    d["drag"] = dyn.drag;
    d["smoothing"] = dyn.smoothing;
  } else {
    d["type"] = "single_integrator";
  }
  j["dynamics"] = d;
  j["cost"] = {{"state_weight", mat_json(p.costs.front().state_weight)},
               {"control_weight", mat_json(p.costs.front().control_weight)}};
  j["x0"] = vec_json(p.x0);
  j["xT"] = vec_json(p.xT);
  if (p.geometry) {
    json g;
    g["agent_radius"] = p.geometry->agent_radius;
    g["pairwise"] = p.geometry->pairwise;
    g["obstacles"] = json::array();
    for (const auto& o : p.geometry->obstacles) g["obstacles"].push_back(obstacle_json(o));
    j["geometry"] = g;
  } else {
    j["geometry"] = nullptr;
  }
  return j;
}

json train_json(const TrainConfig& t) {
  json j;
  j["grid_steps"] = t.grid_steps;
  j["samples"] = t.samples;
  j["adam"] = {{"step", t.adam.step}, {"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}};
  j["loss_threshold"] = t.loss_threshold;
  j["max_iterations"] = t.max_iterations;
  j["schedule"] = {{"eps0", t.schedule.eps0},
                   {"l0", t.schedule.l0},
                   {"n1", t.schedule.n1},
                   {"n2", t.schedule.n2},
                   {"stages", t.schedule.stages}};
  j["warmup_stages"] = t.warmup_stages;
  j["norm"] = norm_name(t.norm);
  j["net"] = {{"pairs", t.net.pairs},
              {"width", t.net.width},
              {"sublayers", t.net.sublayers},
              {"subwidth", t.net.subwidth},
              {"activation", to_string(t.net.activation)},
              {"order", order_name(t.net.order)}};
  return j;
}

json shooting_json(const ShootingConfig& s) {
  json j;
  j["steps"] = s.steps;
  j["tolerance"] = s.tolerance;
  j["max_iterations"] = s.max_iterations;
  j["fd_step"] = s.fd_step;
  j["min_damping"] = s.min_damping;
  j["armijo"] = s.armijo;
  j["initial_costate"] = vec_json(s.initial_costate);
  j["min_horizon_fraction"] = s.min_horizon_fraction;
  return j;
}

// ---------------------------------------------------------------- reading

// Object cursor that knows its path and checks the key set.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

  Node object(std::initializer_list<const char*> keys) const {
    if (!value_.is_object()) fail("expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : value_.items())
      if (!allowed.count(key)) throw ConfigError(child_path(key), "unknown key");
    for (const auto& key : allowed)
      if (!value_.contains(key)) throw ConfigError(child_path(key), "missing key");
    return *this;
  }

  Node at(const std::string& key) const { return Node(value_.at(key), child_path(key)); }
  bool is_null() const { return value_.is_null(); }
  bool has(const std::string& key) const { return value_.is_object() && value_.contains(key); }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double x = value_.get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }

  int integer() const {
    if (!value_.is_number_integer()) fail("expected an integer");
    const auto x = value_.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail("integer out of range");
    return static_cast<int>(x);
  }

  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_unsigned()) fail("expected a non-negative integer");
    return value_.get<std::uint64_t>();
  }

  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  Vec vector() const {
    if (!value_.is_array()) fail("expected an array of numbers");
    Vec v(static_cast<Eigen::Index>(value_.size()));
    for (std::size_t i = 0; i < value_.size(); ++i)
      v(static_cast<Eigen::Index>(i)) = Node(value_[i], path_ + "[" + std::to_string(i) + "]").number();
    return v;
  }

  Vec vector(int size) const {
    Vec v = vector();
    if (v.size() != size) fail("expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
    return v;
  }

  Mat matrix(int size) const {
    if (!value_.is_array() || static_cast<int>(value_.size()) != size)
      fail("expected a " + std::to_string(size) + "x" + std::to_string(size) + " matrix (array of rows)");
    Mat m(size, size);
    for (int r = 0; r < size; ++r)
      m.row(r) = Node(value_[static_cast<std::size_t>(r)], path_ + "[" + std::to_string(r) + "]").vector(size).transpose();
    return m;
  }

  std::size_t size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }
  Node element(std::size_t i) const { return Node(value_[i], path_ + "[" + std::to_string(i) + "]"); }

  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_, message); }

 private:
  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& value_;
  std::string path_;
};

// Library validators throw SolverError; report them against a field.
template <class F>
void checked(const Node& node, F&& f) {
  try {
    f();
  } catch (const SolverError& e) {
    node.fail(e.what());
  }
}

Obstacle read_obstacle(const Node& node, int dim) {
  if (!node.has("type")) {
    if (node.is_null()) node.fail("expected an object");
    throw ConfigError(node.path() + ".type", "missing key");
  }
  const std::string type = node.at("type").string();
  if (type == "circle") {
    const Node o = node.object({"type", "center", "radius"});
    return Circle{o.at("center").vector(dim), o.at("radius").number()};
  }
  if (type == "room") {
    const Node o = node.object({"type", "lo", "hi", "inflate"});
    return RoomBounds{o.at("lo").vector(dim), o.at("hi").vector(dim), o.at("inflate").boolean()};
  }
  if (type == "capsule") {
    const Node o = node.object({"type", "a", "b", "thickness"});
    return CapsuleWall{o.at("a").vector(dim), o.at("b").vector(dim), o.at("thickness").number()};
  }
  if (type == "box") {
    const Node o = node.object({"type", "lo", "hi"});
    return Box{o.at("lo").vector(dim), o.at("hi").vector(dim)};
  }
  node.at("type").fail("unknown obstacle type '" + type + "' (circle, room, capsule, box)");
}

ProblemSpec read_problem(const Node& root) {
  const Node n = root.object({"agents", "space_dim", "horizon", "dynamics", "cost", "x0", "xT", "geometry"});
  ProblemSpec p;
  p.agents = n.at("agents").integer();
  if (p.agents < 1) n.at("agents").fail("must be at least 1");
  p.space_dim = n.at("space_dim").integer();
  if (p.space_dim < 1) n.at("space_dim").fail("must be at least 1");
  p.horizon = n.at("horizon").number();
  if (!(p.horizon > 0.0)) n.at("horizon").fail("must be positive");

  const Node dn = n.at("dynamics");
  if (!dn.has("type")) throw ConfigError(dn.path() + ".type", "missing key");
  const std::string dtype = dn.at("type").string();
  SubsystemDynamics dyn;
  int state_dim = 0;
  if (dtype == "newtonian") {
    dn.object({"type", "drag", "smoothing"});
    const double drag = dn.at("drag").number();
    const double smoothing = dn.at("smoothing").number();
    if (drag < 0.0) dn.at("drag").fail("must be non-negative");
    if (!(smoothing > 0.0)) dn.at("smoothing").fail("must be positive");
    dyn = SubsystemDynamics::newtonian(p.space_dim, drag, smoothing);
    state_dim = 2 * p.space_dim;
  } else if (dtype == "single_integrator") {
    dn.object({"type"});
    dyn = SubsystemDynamics::single_integrator(p.space_dim);
    state_dim = p.space_dim;
  } else {
    dn.at("type").fail("unknown dynamics '" + dtype + "' (newtonian, single_integrator)");
  }
  p.state_dim = state_dim;
  p.control_dim = p.space_dim;
  p.dynamics.assign(static_cast<std::size_t>(p.agents), dyn);

  const Node cn = n.at("cost").object({"state_weight", "control_weight"});
  Mat phi = cn.at("state_weight").matrix(state_dim);
  Mat s = cn.at("control_weight").matrix(p.space_dim);
  checked(cn, [&] { p.costs.assign(static_cast<std::size_t>(p.agents), QuadraticCost::make(phi, s)); });

  p.x0 = n.at("x0").vector(p.dim());
  p.xT = n.at("xT").vector(p.dim());

  const Node gn = n.at("geometry");
  if (!gn.is_null()) {
    gn.object({"agent_radius", "pairwise", "obstacles"});
    SwarmGeometry g;
    g.agents = p.agents;
    g.space_dim = p.space_dim;
    g.agent_radius = gn.at("agent_radius").number();
    g.pairwise = gn.at("pairwise").boolean();
    const Node obs = gn.at("obstacles");
    for (std::size_t i = 0; i < obs.size(); ++i) g.obstacles.push_back(read_obstacle(obs.element(i), p.space_dim));
    checked(gn, [&] { g.validate(); });
    p.geometry = g;
  }
  checked(root, [&] { p.validate(); });
  return p;
}

LossNorm parse_norm(const Node& node) {
  const std::string name = node.string();
  if (name == "euclidean") return LossNorm::euclidean;
  if (name == "squared_mean") return LossNorm::squared_mean;
  node.fail("unknown norm '" + name + "' (euclidean, squared_mean)");
}

LayerOrder parse_order(const Node& node) {
  const std::string name = node.string();
  if (name == "up_first") return LayerOrder::up_first;
  if (name == "low_first") return LayerOrder::low_first;
  node.fail("unknown layer order '" + name + "' (up_first, low_first)");
}

int at_least(const Node& node, int lo) {
  const int v = node.integer();
  if (v < lo) node.fail("must be at least " + std::to_string(lo));
  return v;
}

double positive(const Node& node) {
  const double v = node.number();
  if (!(v > 0.0)) node.fail("must be positive");
  return v;
}

double unit_open(const Node& node) {
  const double v = node.number();
  if (!(v > 0.0 && v < 1.0)) node.fail("must lie in (0, 1)");
  return v;
}

TrainConfig read_train(const Node& root, std::uint64_t seed) {
  const Node n = root.object({"grid_steps", "samples", "adam", "loss_threshold", "max_iterations", "schedule",
                              "warmup_stages", "norm", "net"});
  TrainConfig t;
  t.grid_steps = at_least(n.at("grid_steps"), 1);
  t.samples = at_least(n.at("samples"), 2);
  const Node an = n.at("adam").object({"step", "beta1", "beta2", "epsilon"});
  t.adam = {an.at("step").number(), an.at("beta1").number(), an.at("beta2").number(), an.at("epsilon").number()};
  checked(an, [&] { t.adam.validate(); });
  t.loss_threshold = positive(n.at("loss_threshold"));
  t.max_iterations = at_least(n.at("max_iterations"), 1);
  const Node sn = n.at("schedule").object({"eps0", "l0", "n1", "n2", "stages"});
  t.schedule = {positive(sn.at("eps0")), positive(sn.at("l0")), unit_open(sn.at("n1")), unit_open(sn.at("n2")),
                at_least(sn.at("stages"), 1)};
  checked(sn, [&] { t.schedule.validate(); });
  t.warmup_stages = at_least(n.at("warmup_stages"), 0);
  t.norm = parse_norm(n.at("norm"));
  const Node nn = n.at("net").object({"pairs", "width", "sublayers", "subwidth", "activation", "order"});
  t.net.pairs = nn.at("pairs").integer();
  t.net.width = nn.at("width").integer();
  t.net.sublayers = nn.at("sublayers").integer();
  t.net.subwidth = nn.at("subwidth").integer();
  try {
    t.net.activation = parse_activation(nn.at("activation").string());
  } catch (const SolverError& e) {
    nn.at("activation").fail(e.what());
  }
  t.net.order = parse_order(nn.at("order"));
  if (t.net.pairs < 1 || t.net.width < 1 || t.net.sublayers < 1 || t.net.subwidth < 1)
    nn.fail("layer counts and widths must be positive");
  t.seed = seed;
  checked(n, [&] { t.validate(); });
  return t;
}

ShootingConfig read_shooting(const Node& root, int dim) {
  const Node n = root.object({"steps", "tolerance", "max_iterations", "fd_step", "min_damping", "armijo",
                              "initial_costate", "min_horizon_fraction"});
  ShootingConfig s;
  s.steps = at_least(n.at("steps"), 10);
  s.tolerance = positive(n.at("tolerance"));
  s.max_iterations = at_least(n.at("max_iterations"), 1);
  s.fd_step = positive(n.at("fd_step"));
  s.min_damping = n.at("min_damping").number();
  s.armijo = n.at("armijo").number();
  s.initial_costate = n.at("initial_costate").vector();
  if (s.initial_costate.size() != 0 && s.initial_costate.size() != dim)
    n.at("initial_costate").fail("expected [] or " + std::to_string(dim) + " entries");
  s.min_horizon_fraction = n.at("min_horizon_fraction").number();
  checked(n, [&] { s.validate(); });
  return s;
}

bool known_kind(const std::string& kind) {
  static const std::set<std::string> fixed = {"oscillator", "single_circle", "four_circle", "maze", "box3d_swarm",
                                              "custom"};
  if (fixed.count(kind)) return true;
  if (kind.rfind("room_", 0) != 0 || kind.size() == 5) return false;
  for (std::size_t i = 5; i < kind.size(); ++i)
    if (kind[i] < '0' || kind[i] > '9') return false;
  return true;
}

// ---------------------------------------------------------------- scenarios

Mat diag(std::initializer_list<double> entries) {
  Vec d(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double e : entries) d(i++) = e;
  return d.asDiagonal();
}

ProblemSpec planar_swarm(int agents, double drag, const Mat& phi) {
  ProblemSpec p;
  p.agents = agents;
  p.space_dim = 2;
  p.state_dim = 4;
  p.control_dim = 2;
  p.horizon = 10.0;
  p.dynamics.assign(static_cast<std::size_t>(agents), SubsystemDynamics::newtonian(2, drag));
  p.costs.assign(static_cast<std::size_t>(agents), QuadraticCost::make(phi, Mat::Identity(2, 2)));
  p.x0 = Vec::Zero(4 * agents);
  p.xT = Vec::Zero(4 * agents);
  return p;
}

void place(ProblemSpec& p, int agent, double wx, double wy, double gx, double gy) {
  p.x0.segment(4 * agent, 2) << wx, wy;
  p.xT.segment(4 * agent, 2) << gx, gy;
}

TrainConfig base_train() {
  TrainConfig t;
  t.grid_steps = 1000;
  t.samples = 10;
  t.adam = AdamConfig{};
  t.loss_threshold = 1e-2;
  t.max_iterations = 30000;
  t.schedule = PenaltySchedule{};
  t.warmup_stages = 0;
  t.norm = LossNorm::euclidean;
  return t;
}

// Evenly spaced points on the square of half-width r, counter-clockwise
// from the top-left corner.
std::vector<std::array<double, 2>> perimeter_points(int count, double r) {
  std::vector<std::array<double, 2>> out;
  const double side = 2.0 * r;
  for (int i = 0; i < count; ++i) {
    double s = 4.0 * side * i / count;
    const int edge = static_cast<int>(s / side);
    s -= edge * side;
    switch (edge) {
      case 0: out.push_back({-r, r - s}); break;
      case 1: out.push_back({-r + s, -r}); break;
      case 2: out.push_back({r, -r + s}); break;
      default: out.push_back({r - s, r}); break;
    }
  }
  return out;
}

ScenarioConfig oscillator() {
  ScenarioConfig c;
  ProblemSpec& p = c.problem;
  p.agents = 1;
  p.space_dim = 1;
  p.state_dim = 1;
  p.control_dim = 1;
  p.horizon = std::numbers::pi / 4.0;
  p.dynamics = {SubsystemDynamics::single_integrator(1)};
  // H = <p, u> - F + G*(p) = (x^2 + p^2) / 2 needs F = -x^2 / 2.
  p.costs = {QuadraticCost::make(Mat::Constant(1, 1, -1.0), Mat::Identity(1, 1))};
  p.x0 = Vec::Constant(1, 1.0);
  p.xT = Vec::Constant(1, std::cos(p.horizon));
  c.train = base_train();
  c.train.grid_steps = 100;
  c.train.max_iterations = 2000;
  c.train.loss_threshold = 1e-6;
  c.train.schedule.stages = 1;
  return c;
}

ScenarioConfig single_circle() {
  ScenarioConfig c;
  c.problem = planar_swarm(1, 0.0, Mat::Zero(4, 4));
  place(c.problem, 0, -0.5, 0.5, 0.5, -0.5);
  SwarmGeometry g;
  g.agents = 1;
  g.space_dim = 2;
  g.agent_radius = 0.05;
  g.pairwise = false;
  g.obstacles.push_back(Circle{Vec::Zero(2), 0.15});
  c.problem.geometry = g;
  c.train = base_train();
  return c;
}

ScenarioConfig four_circle() {
  ScenarioConfig c;
  c.problem = planar_swarm(4, 0.0, diag({0.0, 0.0, 1.0, 1.0}));
  const double starts[4][2] = {{-0.5, 0.5}, {-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}};
  for (int i = 0; i < 4; ++i) place(c.problem, i, starts[i][0], starts[i][1], -starts[i][0], -starts[i][1]);
  SwarmGeometry g;
  g.agents = 4;
  g.space_dim = 2;
  g.agent_radius = 0.05;
  g.pairwise = true;
  g.obstacles.push_back(Circle{Vec::Zero(2), 0.15});
  c.problem.geometry = g;
  c.train = base_train();
  c.train.warmup_stages = 3;
  c.train.max_iterations = 10000;
  return c;
}

SwarmGeometry room_geometry(int agents, double agent_radius) {
  SwarmGeometry g;
  g.agents = agents;
  g.space_dim = 2;
  g.agent_radius = agent_radius;
  g.pairwise = true;
  g.obstacles.push_back(RoomBounds{Vec::Constant(2, -0.5), Vec::Constant(2, 0.5), false});
  return g;
}

ScenarioConfig room(int agents) {
  ScenarioConfig c;
  c.problem = planar_swarm(agents, 0.0, Mat::Zero(4, 4));
  const auto pts = perimeter_points(agents, 0.4);
  for (int i = 0; i < agents; ++i) place(c.problem, i, pts[i][0], pts[i][1], -pts[i][0], -pts[i][1]);
  c.problem.geometry = room_geometry(agents, 0.02);
  c.train = base_train();
  c.train.max_iterations = 10000;
  return c;
}

// Two staggered walls leave an S-shaped corridor through the room.
ScenarioConfig maze() {
  ScenarioConfig c;
  const int agents = 4;
  c.problem = planar_swarm(agents, 0.0, Mat::Zero(4, 4));
  const double starts[4][2] = {{-0.4, 0.4}, {-0.2, 0.4}, {0.2, -0.4}, {0.4, -0.4}};
  for (int i = 0; i < agents; ++i) place(c.problem, i, starts[i][0], starts[i][1], -starts[i][0], -starts[i][1]);
  SwarmGeometry g = room_geometry(agents, 0.02);
  Vec a(2), b(2);
  a << -0.5, 0.15;
  b << 0.15, 0.15;
  g.obstacles.push_back(CapsuleWall{a, b, 0.02});
  a << -0.15, -0.15;
  b << 0.5, -0.15;
  g.obstacles.push_back(CapsuleWall{a, b, 0.02});
  c.problem.geometry = g;
  c.train = base_train();
  c.train.max_iterations = 10000;
  return c;
}

// 100 drones cross from y = -3 to y = +3 past a wall and a block.
ScenarioConfig box3d_swarm() {
  ScenarioConfig c;
  const int agents = 100;
  ProblemSpec& p = c.problem;
  p.agents = agents;
  p.space_dim = 3;
  p.state_dim = 6;
  p.control_dim = 3;
  p.horizon = 10.0;
  p.dynamics.assign(agents, SubsystemDynamics::newtonian(3, 0.0));
  p.costs.assign(agents, QuadraticCost::make(Mat::Zero(6, 6), Mat::Identity(3, 3)));
  p.x0 = Vec::Zero(6 * agents);
  p.xT = Vec::Zero(6 * agents);
  for (int i = 0; i < agents; ++i) {
    const double x = -2.7 + 0.6 * (i % 10);
    const double z = 0.8 + 0.6 * (i / 10);
    p.x0.segment(6 * i, 3) << x, -3.0, z;
    p.xT.segment(6 * i, 3) << -x, 3.0, z;
  }
  SwarmGeometry g;
  g.agents = agents;
  g.space_dim = 3;
  g.agent_radius = 0.2;
  g.pairwise = true;
  Vec lo(3), hi(3);
  lo << -1.8, -0.3, 0.2;
  hi << 1.8, 0.3, 6.8;
  g.obstacles.push_back(Box{lo, hi});
  lo << 2.2, -0.8, 0.2;
  hi << 3.8, 0.8, 3.8;
  g.obstacles.push_back(Box{lo, hi});
  p.geometry = g;
  c.train = base_train();
  c.train.max_iterations = 5000;
  return c;
}

ScenarioConfig base_for(const std::string& kind) {
  if (kind == "oscillator") return oscillator();
  if (kind == "single_circle" || kind == "custom") return single_circle();
  if (kind == "four_circle") return four_circle();
  if (kind == "maze") return maze();
  if (kind == "box3d_swarm") return box3d_swarm();
  if (known_kind(kind)) {
    const int agents = std::stoi(kind.substr(5));
    if (agents < 1) throw ConfigError("kind", "room needs at least one agent");
    return room(agents);
  }
  throw ConfigError("kind", "unknown scenario kind '" + kind + "'");
}

}  // namespace

json to_json(const ScenarioConfig& config) {
  json j;
  j["kind"] = config.kind;
  j["seed"] = config.seed;
  j["output_dir"] = config.output_dir;
  j["problem"] = problem_json(config.problem);
  j["train"] = train_json(config.train);
  j["shooting"] = shooting_json(config.shooting);
  return j;
}

ScenarioConfig parse_scenario(const json& doc) {
  const Node root = Node(doc, "").object({"kind", "seed", "output_dir", "problem", "train", "shooting"});
  ScenarioConfig c;
  c.kind = root.at("kind").string();
  if (!known_kind(c.kind)) root.at("kind").fail("unknown scenario kind '" + c.kind + "'");
  c.seed = root.at("seed").unsigned_integer();
  c.output_dir = root.at("output_dir").string();
  c.problem = read_problem(root.at("problem"));
  c.train = read_train(root.at("train"), c.seed);
  // The problem is solved (and validated by shooting) at the last stage.
  c.problem.penalty = c.train.schedule.final();
  c.shooting = read_shooting(root.at("shooting"), c.problem.dim());
  return c;
}

ScenarioConfig parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // The library message already carries line and column.
    throw ConfigError("", std::string("syntax error: ") + e.what());
  }
  return parse_scenario(doc);
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(e.field(), e.message() + " (in " + path + ")");
  }
}

std::string serialize_scenario(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("", "override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (node->is_array()) {
      std::size_t index = 0;
      try {
        index = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError(path, "expected an array index at '" + key + "'");
      }
      if (index >= node->size()) throw ConfigError(path, "index " + key + " out of range");
      node = &(*node)[index];
    } else if (node->is_object() && node->contains(key)) {
      node = &(*node)[key];
    } else {
      throw ConfigError(path, "no such setting");
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

ScenarioConfig build_scenario(const std::string& kind, const std::vector<std::string>& overrides) {
  ScenarioConfig base = base_for(kind);
  base.kind = kind;
  json doc = to_json(base);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_scenario(doc);
}

std::vector<std::string> scenario_kinds() {
  return {"oscillator", "single_circle", "four_circle", "room_8", "room_16", "room_32", "room_64", "maze",
          "box3d_swarm", "custom"};
}

}  // namespace tsymp
