#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "activeuwb/sac.hpp"
#include "activeuwb/sim.hpp"

namespace activeuwb {

/// Randomized training episodes: the tag spawns at a uniform distance and
/// bearing around the AnchorBot, holds, then follows a sinusoidal trajectory
/// with per-axis amplitude, frequency and phase drawn uniformly.
struct TrainingScenario {
  double spawn_min = 0.6;  // m
  double spawn_max = 1.0;  // m
  double amp_min = 1.0;    // m
  double amp_max = 2.5;
  double freq_min = 0.008;  // Hz
  double freq_max = 0.016;
  double phase_min = 0.0;  // rad
  double phase_max = 2.0 * std::numbers::pi;

  void validate() const;
};

/// AnchorBot starts at the world origin facing +x, so body and world frames
/// coincide at k = 0.
TagTrajectory sample_training_trajectory(const TrainingScenario& sc, int hold_steps, Rng& rng);

struct TrainConfig {
  double learning_rate = 3e-4;
  double discount = 0.99;
  int batch_size = 256;
  double polyak_tau = 0.005;
  std::size_t buffer_capacity = 200'000;
  long warmup_steps = 1000;  // uniform random actions, no updates
  double target_entropy = -2.0;
  double init_temperature = 1.0;
  long total_steps = 200'000;
  long eval_every = 5000;
  int eval_episodes = 10;
  int hidden_width = 256;
  int hidden_layers = 3;
  unsigned eval_workers = 1;
  TrainingScenario scenario{};

  void validate() const;
  SacConfig sac_config(const SimConfig& sim) const;
};

struct EvalPoint {
  long step = 0;
  double mean_return = 0.0;
  double front_fraction = 0.0;  // share of post-hold steps with the tag in the front sector
};

struct TrainResult {
  SacPolicy policy;
  std::vector<double> episode_returns;
  std::vector<EvalPoint> eval_curve;
  std::size_t buffer_fill = 0;
  long env_steps = 0;
  long updates = 0;
  SacAgent<float>::Diagnostics last{};
};

using TrainProgress = std::function<void(const EvalPoint&, const SacAgent<float>::Diagnostics&)>;

/// Trains the asymmetric SAC agent. One gradient step per environment step
/// once the warmup is over. Evaluates the greedy policy at step 0 and every
/// `eval_every` steps on a fixed set of scenarios derived from `seed`.
TrainResult train(const SimConfig& sim, std::shared_ptr<const LossModel> loss, const TrainConfig& cfg,
                  std::uint64_t seed, const TrainProgress& progress = {});

/// Greedy evaluation on `episodes` fixed scenarios derived from `seed`.
EvalPoint evaluate_policy(const Policy& policy, const SimConfig& sim, std::shared_ptr<const LossModel> loss,
                          const TrainingScenario& scenario, int episodes, std::uint64_t seed, unsigned workers = 1);

}  // namespace activeuwb
