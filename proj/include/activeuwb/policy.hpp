#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "activeuwb/estimation.hpp"
#include "activeuwb/sim.hpp"

namespace activeuwb {

/// Maps the actor observation (the 3H range history, most recent triple
/// first) to a saturated velocity command. Policies never see the true tag
/// position.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual ControlCommand act(std::span<const double> observation) = 0;
  /// Clears per-episode state.
  virtual void reset() {}
  virtual bool deterministic() const { return true; }
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
};

/// Keeps the AnchorBot stationary.
class StaticPolicy final : public Policy {
 public:
  ControlCommand act(std::span<const double>) override { return {}; }
  std::string name() const override { return "static"; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<StaticPolicy>(); }
};

struct GeometricGains {
  double k_v = 1.0;      // 1/s
  double k_theta = 2.0;  // 1/s
};

/// Model-based reference controller. Trilaterates the latest range triple and
/// steers so that the tag sits at `goal` in the body frame. Each solve is
/// warm-started at the previous estimate carried through the ego-motion of
/// the last command (a stationary-tag prediction).
class GeometricPolicy final : public Policy {
 public:
  GeometricPolicy(AnchorLayout layout, RelPosition goal, GeometricGains gains = {}, ActuatorLimits limits = {},
                  SolverOptions solver = {}, double t_s = 0.1);

  /// omega = k_theta * wrap(bearing(est) - bearing(goal))
  /// v     = k_v * (||est|| - ||goal||) * cos(wrap(bearing(est) - bearing(goal)))
  /// both saturated. The cosine factor drives in reverse when the tag is
  /// behind and makes v vanish when it is abeam.
  static ControlCommand control_law(const RelPosition& estimate, const RelPosition& goal, const GeometricGains& gains,
                                    const ActuatorLimits& limits);

  ControlCommand act(std::span<const double> observation) override;
  void reset() override { last_estimate_.reset(); }
  std::string name() const override { return "heuristic"; }
  std::unique_ptr<Policy> clone() const override;

  const std::optional<RelPosition>& last_estimate() const { return last_estimate_; }

 private:
  RelPosition cold_start(const RangeTriple& ranges) const;

  AnchorLayout layout_;
  RelPosition goal_;
  GeometricGains gains_;
  ActuatorLimits limits_;
  SolverOptions solver_;
  double t_s_;
  std::optional<RelPosition> last_estimate_;
  RelPosition predicted_ = RelPosition::Zero();
};

}  // namespace activeuwb
