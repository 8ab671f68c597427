#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "activeuwb/mlp.hpp"
#include "activeuwb/policy.hpp"
#include "activeuwb/replay.hpp"

namespace activeuwb {

struct SacConfig {
  int obs_dim = 30;         // 3H
  int critic_obs_dim = 3;   // [x_t, y_t, theta]
  int action_dim = 2;
  int hidden_width = 256;
  int hidden_layers = 3;
  double learning_rate = 3e-4;
  double discount = 0.99;
  double polyak_tau = 0.005;
  double target_entropy = -2.0;
  double init_temperature = 1.0;
  double log_std_min = -20.0;
  double log_std_max = 2.0;

  void validate() const;
};

/// Asymmetric soft actor-critic. The actor maps the range history to a
/// tanh-squashed Gaussian over normalized actions in [-1, 1]^A; the twin
/// critics score [critic_obs; normalized action].
template <typename Scalar>
class SacAgent {
 public:
  using Net = Mlp<Scalar>;
  using Matrix = typename Net::Matrix;
  using Vector = typename Net::Vector;
  using Batch = TransitionBatch<Scalar>;

  struct PolicyOutput {
    Matrix mean, log_std, pre_tanh, action;
    Matrix log_prob;   // 1 x B
    Matrix std_mask;   // 1 where log-std is inside the clamp range
    typename Net::Cache cache;
  };

  struct ActorLoss {
    double loss = 0.0;
    double mean_log_prob = 0.0;
    Vector grad;  // d loss / d actor parameters
  };

  struct CriticLoss {
    double loss = 0.0;    // 0.5 * (mse(Q1, y) + mse(Q2, y))
    double mean_q = 0.0;
    double mean_target = 0.0;
    std::array<Vector, 2> grad;
  };

  struct Diagnostics {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double temperature_loss = 0.0;
    double temperature = 0.0;
    double mean_log_prob = 0.0;
    double mean_q = 0.0;
  };

  SacAgent(SacConfig cfg, Rng& init_rng);

  /// Reparameterized policy evaluation with explicit standard-normal noise
  /// (action_dim x B).
  PolicyOutput evaluate_policy(const Matrix& obs, const Matrix& noise) const;
  /// tanh(mean), the greedy normalized action.
  Matrix deterministic_action(const Matrix& obs) const;
  Matrix sample_action(const Matrix& obs, Rng& rng) const;

  /// mean(temperature * log pi - min(Q1, Q2)) at a = tanh(mean + std * noise).
  ActorLoss actor_loss(const Matrix& obs, const Matrix& critic_obs, const Matrix& noise, double temperature,
                       bool with_grad = true) const;
  /// Bellman regression of both critics; `next_noise` drives the next-action
  /// samples.
  CriticLoss critic_loss(const Batch& batch, const Matrix& next_noise, double temperature,
                         bool with_grad = true) const;

  /// One gradient step on temperature, critics and actor, then a Polyak
  /// update of the targets. Throws NumericalDivergence on non-finite losses.
  Diagnostics update(const Batch& batch, Rng& rng);

  Matrix critic_input(const Matrix& critic_obs, const Matrix& action) const;

  const SacConfig& config() const { return cfg_; }
  Net& actor() { return actor_; }
  const Net& actor() const { return actor_; }
  Net& critic(int i) { return critics_[i]; }
  const Net& critic(int i) const { return critics_[i]; }
  Net& target(int i) { return targets_[i]; }
  const Net& target(int i) const { return targets_[i]; }
  double log_temperature() const { return static_cast<double>(log_temp_[0]); }
  double temperature() const;
  void set_log_temperature(double v) { log_temp_[0] = static_cast<Scalar>(v); }
  long updates() const { return updates_; }

 private:
  Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) const;

  SacConfig cfg_;
  Net actor_;
  std::array<Net, 2> critics_;
  std::array<Net, 2> targets_;
  Vector log_temp_;
  Adam<Scalar> actor_opt_;
  std::array<Adam<Scalar>, 2> critic_opt_;
  Adam<Scalar> temp_opt_;
  long updates_ = 0;
};

extern template class SacAgent<float>;
extern template class SacAgent<double>;

/// Deployed actor: greedy mean action, squashed and scaled to the actuator
/// limits. Reads only the range history.
class SacPolicy final : public Policy {
 public:
  SacPolicy(Mlp<float> actor, ActuatorLimits limits, int history, std::array<Vec2, 3> layout_anchors);

  ControlCommand act(std::span<const double> observation) override;
  std::string name() const override { return "sac"; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<SacPolicy>(*this); }

  const Mlp<float>& actor() const { return actor_; }
  const ActuatorLimits& limits() const { return limits_; }
  int history() const { return history_; }
  const std::array<Vec2, 3>& layout_anchors() const { return anchors_; }

 private:
  Mlp<float> actor_;
  ActuatorLimits limits_;
  int history_;
  std::array<Vec2, 3> anchors_;
};

/// Policy checkpoint, little-endian binary:
///   magic "AUWBPOL1" (8 bytes), version u8 (=1), scalar tag u8 (4 = float32)
///   history H u32, v_max f64, omega_max f64, anchors 6 x f64 (x0 y0 x1 y1 x2 y2)
///   layer count L+1 u32, widths L+1 x u32
///   hidden activation tags L-1 x u8 (1 = relu), head tag u8 (2 = squashed gaussian)
///   parameter count u64, parameters (per layer: weights row-major, then bias)
void save_policy(const SacPolicy& policy, const std::string& path);
SacPolicy load_policy(const std::string& path);

}  // namespace activeuwb
