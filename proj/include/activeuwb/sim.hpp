#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <numbers>
#include <variant>
#include <vector>

#include "activeuwb/geometry.hpp"
#include "activeuwb/loss.hpp"
#include "activeuwb/random.hpp"
#include "activeuwb/sensing.hpp"

namespace activeuwb {

// ---------------------------------------------------------------------------
// Kinematics

/// World-frame pose; theta is kept in (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// u = [v, omega] in m/s and rad/s.
struct ControlCommand {
  double v = 0.0;
  double omega = 0.0;

  double norm() const { return std::hypot(v, omega); }
};

struct ActuatorLimits {
  double v_max = 0.5;      // m/s
  double omega_max = 1.5;  // rad/s

  ControlCommand saturate(const ControlCommand& u) const;
  bool admits(const ControlCommand& u) const;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Exact integration of the unicycle over one sampling interval.
Pose2D step_unicycle(const Pose2D& pose, const ControlCommand& u, double t_s);

/// Expresses a world point in the body frame of `robot`.
Vec2 to_body(const Pose2D& robot, const Vec2& world);
Vec2 to_world(const Pose2D& robot, const Vec2& body);

// ---------------------------------------------------------------------------
// TagBot motion

/// Sinusoidal training trajectory, offset from the start position. The tag
/// holds still for k <= hold_steps, then follows
///   start + s(k t_s) - s(hold_steps t_s),  s(t) = [Ax sin(2 pi fx t + px), Ay sin(2 pi fy t + py)]
/// so there is no jump at motion onset.
struct TagTrajectory {
  Vec2 start = Vec2::Zero();
  double amp_x = 0.0, amp_y = 0.0;      // m
  double freq_x = 0.0, freq_y = 0.0;    // Hz
  double phase_x = 0.0, phase_y = 0.0;  // rad
  int hold_steps = 0;
};

Vec2 tag_position_at(long k, const TagTrajectory& traj, double t_s);

struct StaticPath {
  Vec2 position = Vec2::Zero();
};

/// Constant-speed straight segment; the tag stops at the end.
struct LinePath {
  Vec2 start = Vec2::Zero();
  Vec2 direction = Vec2::UnitX();  // unit
  double speed = 0.05;             // m/s
  double length = 2.0;             // m
  int hold_steps = 0;
};

/// Counter-clockwise circle around a fixed world point.
struct CirclePath {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  double start_angle = 0.0;  // rad
  double speed = 0.05;       // m/s along the arc
  int hold_steps = 0;
};

/// Closed square traversed counter-clockwise, starting at `start` along
/// `first_leg`, turning left at every corner.
struct SquarePath {
  Vec2 start = Vec2::Zero();
  Vec2 first_leg = Vec2::UnitY();  // unit
  double side = 1.0;
  double speed = 0.05;
  int hold_steps = 0;
};

using TagPath = std::variant<StaticPath, TagTrajectory, LinePath, CirclePath, SquarePath>;

Vec2 tag_position_at(long k, const TagPath& path, double t_s);

// ---------------------------------------------------------------------------
// Reward

struct RewardParams {
  double k_u = 0.1;                              // effort weight
  double k_c = 10.0;                             // collision penalty
  double d_m = 0.35;                             // m, minimum allowed distance
  double front_angle = std::numbers::pi / 4.0;  // rad

  void validate() const;
};

/// r = -k_c                  if ||p_t|| < d_m (checked first)
///     r_l - k_u r_u          if x_t > 0 and |atan2(y_t, x_t)| < front_angle
///     -k_u r_u               otherwise
/// with r_l = max(0, 1 - l_scaled(p_t)) and r_u = ||u|| / (1 + ||u||).
double compute_reward(const RelPosition& tag_rel, const ControlCommand& u, const LossModel& loss,
                      const RewardParams& params);

// ---------------------------------------------------------------------------
// Observation

/// Range history, most recent reading first.
using RangeHistory = std::deque<RangeTriple>;

/// [d(k), d(k-1), ..., d(k-H+1)] flattened to 3H values; a short history is
/// padded by repeating its oldest reading.
std::vector<double> build_observation(const RangeHistory& history, int horizon);

// ---------------------------------------------------------------------------
// Episode engine

struct SimConfig {
  double t_s = 0.1;              // s
  int history = 10;              // H
  double episode_seconds = 30.0;
  double hold_seconds = 10.0;    // stationary prefix of training trajectories
  ActuatorLimits limits{};
  RewardParams reward{};
  RangingModel ranging{};

  int max_steps() const;
  int hold_steps() const;
  void validate() const;
};

enum class DoneReason { running, time_limit, collision };
const char* to_string(DoneReason r);

struct EpisodeState {
  Pose2D anchorbot{};
  Vec2 tag_world = Vec2::Zero();
  long k = 0;
  double t_s = 0.1;
  RangeHistory range_history;  // at most H entries, most recent first
  bool done = false;
  DoneReason reason = DoneReason::running;
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
  DoneReason reason = DoneReason::running;
  ControlCommand applied{};
};

/// AnchorBot/TagBot simulation. The anchor layout comes from the loss model.
class Environment {
 public:
  Environment(SimConfig cfg, std::shared_ptr<const LossModel> loss);

  /// Starts an episode with the AnchorBot at `start` and the tag on `path`.
  /// Range noise is drawn from a stream seeded with `seed`.
  void reset(const TagPath& path, std::uint64_t seed, const Pose2D& start = {});

  /// Applies the saturated command for one sampling interval, moves the tag,
  /// takes a new range reading and returns the transition reward.
  StepResult step(const ControlCommand& u);

  /// Actor input, 3H range values.
  std::vector<double> observation() const;
  /// Critic input [x_t, y_t, theta]: body-frame tag position and AnchorBot heading.
  std::array<double, 3> critic_observation() const;

  RelPosition tag_relative() const { return to_body(state_.anchorbot, state_.tag_world); }
  const RangeTriple& latest_ranges() const { return state_.range_history.front(); }
  const EpisodeState& state() const { return state_; }
  const SimConfig& config() const { return cfg_; }
  const LossModel& loss() const { return *loss_; }
  const AnchorLayout& layout() const { return loss_->config().layout; }
  int clamp_count() const { return clamped_; }

 private:
  void sense();

  SimConfig cfg_;
  std::shared_ptr<const LossModel> loss_;
  TagPath path_;
  EpisodeState state_;
  Rng rng_;
  int clamped_ = 0;
};

}  // namespace activeuwb
