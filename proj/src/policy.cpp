#include "activeuwb/policy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "activeuwb/errors.hpp"

namespace activeuwb {

GeometricPolicy::GeometricPolicy(AnchorLayout layout, RelPosition goal, GeometricGains gains, ActuatorLimits limits,
                                 SolverOptions solver, double t_s)
    : layout_(std::move(layout)), goal_(goal), gains_(gains), limits_(limits), solver_(solver), t_s_(t_s) {}

ControlCommand GeometricPolicy::control_law(const RelPosition& estimate, const RelPosition& goal,
                                            const GeometricGains& gains, const ActuatorLimits& limits) {
  const double heading_error = wrap_angle(bearing(estimate) - bearing(goal));
  const double range_error = estimate.norm() - goal.norm();
  return limits.saturate({gains.k_v * range_error * std::cos(heading_error), gains.k_theta * heading_error});
}

RelPosition GeometricPolicy::cold_start(const RangeTriple& ranges) const {
  // Multi-start over bearings at the mean measured range; keep the best fit.
  const double r = std::max(ranges.mean(), layout_.max_radius() + 0.05);
  RelPosition best = RelPosition(r, 0.0);
  double best_residual = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 8; ++i) {
    const double a = i * std::numbers::pi / 4.0;
    Estimate e;
    try {
      e = trilaterate(ranges, layout_, RelPosition(r * std::cos(a), r * std::sin(a)), solver_);
    } catch (const DegenerateGeometry&) {
      continue;
    }
    if (e.residual_norm < best_residual) {
      best_residual = e.residual_norm;
      best = e.position;
    }
  }
  return best;
}

ControlCommand GeometricPolicy::act(std::span<const double> observation) {
  if (observation.size() < 3) throw std::invalid_argument("GeometricPolicy: observation shorter than one range triple");
  const RangeTriple latest(observation[0], observation[1], observation[2]);
  RelPosition estimate;
  try {
    estimate = last_estimate_ ? trilaterate(latest, layout_, predicted_, solver_).position : cold_start(latest);
  } catch (const DegenerateGeometry&) {
    estimate = cold_start(latest);
  }
  last_estimate_ = estimate;
  const ControlCommand u = control_law(estimate, goal_, gains_, limits_);
  predicted_ = to_body(step_unicycle(Pose2D{}, u, t_s_), estimate);
  return u;
}

std::unique_ptr<Policy> GeometricPolicy::clone() const {
  return std::make_unique<GeometricPolicy>(layout_, goal_, gains_, limits_, solver_, t_s_);
}

}  // namespace activeuwb
