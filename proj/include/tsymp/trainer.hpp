#pragma once

#include "tsymp/adam.hpp"
#include "tsymp/latent_lqr.hpp"
#include "tsymp/penalty.hpp"
#include "tsymp/problem.hpp"
#include "tsymp/sympnet.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace tsymp {

enum class LossNorm {
  euclidean,     // sum of un-squared residual norms
  squared_mean,  // mean of squared residual norms
};

struct NetConfig {
  int pairs = 2;
  int width = 16;
  int sublayers = 2;
  int subwidth = 16;
  Activation activation = Activation::tanh;
  LayerOrder order = LayerOrder::up_first;
};

struct TrainConfig {
  int grid_steps = 100;  // N-bar
  int samples = 100;     // N-tilde; the batch has samples + 1 times
  AdamConfig adam;
  double loss_threshold = 1e-2;
  int max_iterations = 5000;  // per penalty stage
  PenaltySchedule schedule;
  int warmup_stages = 0;  // N_opt; 0 disables the warm-up
  std::uint64_t seed = 0;
  NetConfig net;
  LossNorm norm = LossNorm::euclidean;

  void validate() const;
};

/// `total` is always the sum of un-squared residual norms; `objective` is
/// the quantity being minimized under the selected LossNorm.
struct LossReport {
  double total = 0.0;
  double state_residual = 0.0;    // sum over samples of |x' - dH/dp|
  double costate_residual = 0.0;  // sum over samples of |p' + dH/dx|
  double objective = 0.0;
  int iteration = 0;
  double wall_ms = 0.0;
};

/// Rolled-out solution on the latent grid; rows are nodes.
struct PhaseTrajectory {
  Vec times;
  Mat x;
  Mat p;
  Mat xdot;
  Mat pdot;
  Mat u;
};

struct HistoryRow {
  int iteration;  // global across stages
  int stage;
  double eps;
  double l;
  double loss;
  double wall_ms;
};

struct StageRecord {
  int stage;
  PenaltyParams penalty;
  int iterations;
  double best_loss;
  bool converged;
};

struct TrainResult {
  TlSympNet net;
  LatentTrajectory latent;
  PhaseTrajectory trajectory;
  std::vector<HistoryRow> history;
  std::vector<StageRecord> stages;
  PenaltyParams penalty;  // parameters of the last stage
  double final_loss = 0.0;
  bool converged = false;
};

/// 0 = t_0 <= t_1 <= ... <= t_samples = T with i.i.d. uniform interior points.
Vec sample_times(int samples, double horizon, std::mt19937_64& rng);

/// Bracketing grid interval k and blend weight w in [0, 1] for time t.
struct Bracket {
  Eigen::Index k;
  double w;
};
Bracket bracket(const LatentTrajectory& latent, double t);

Vec interpolated_phase(const TlSympNet& net, const LatentTrajectory& latent, double t);
Vec phase_derivative(const TlSympNet& net, const LatentTrajectory& latent, double t);

LossReport physics_loss(const TlSympNet& net, const ProblemSpec& problem, const LatentTrajectory& latent,
                        const Vec& times, LossNorm norm = LossNorm::euclidean);

struct LossGradient {
  LossReport report;
  Vec gradient;  // flattened like TlSympNet::flatten()
};
LossGradient loss_and_gradient(const TlSympNet& net, const ProblemSpec& problem,
                               const LatentTrajectory& latent, const Vec& times,
                               LossNorm norm = LossNorm::euclidean);

TlSympNet make_network(const NetConfig& config, int half_dim, double horizon, std::uint64_t seed);

/// Invoked after every inner iteration; returning false stops training.
using TrainObserver = std::function<bool(const HistoryRow&)>;

/// Algorithm 1. `init` (if given) seeds the network parameters; otherwise a
/// fresh identity-initialized network is drawn from config.seed.
TrainResult train(const ProblemSpec& problem, const TrainConfig& config, const TlSympNet* init = nullptr,
                  const TrainObserver& observer = {});

/// Boundary data of the easier problem used by the warm-up homotopy.
struct WarmupBoundary {
  Vec x0;
  Vec xT;
};

/// Velocity-controlled single-integrator version of `problem` on positions
/// only, with cost 1/2 |v|^2 and the same geometry.
ProblemSpec simpler_problem(const ProblemSpec& problem);

/// Warm-up homotopy. Without `boundary`, stage 0 trains the simpler
/// problem and reads v(0), v(T) off its solution.
TrainResult warmup_train(const ProblemSpec& problem, const TrainConfig& config,
                         const std::optional<WarmupBoundary>& boundary = std::nullopt,
                         const TrainObserver& observer = {});

/// Evaluates the network on every latent grid node.
PhaseTrajectory rollout(const TlSympNet& net, const ProblemSpec& problem, const LatentTrajectory& latent);

/// min over nodes and pairs of |w_i - w_j| - 2 C_d; +infinity without pairs.
double violation_metric(const PhaseTrajectory& trajectory, const ProblemSpec& problem);

/// min over nodes of the obstacle clearances h1; +infinity without obstacles.
double min_clearance(const PhaseTrajectory& trajectory, const ProblemSpec& problem);

}  // namespace tsymp
