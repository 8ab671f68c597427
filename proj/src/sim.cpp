#include "activeuwb/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace activeuwb {

ControlCommand ActuatorLimits::saturate(const ControlCommand& u) const {
  return {std::clamp(u.v, -v_max, v_max), std::clamp(u.omega, -omega_max, omega_max)};
}

bool ActuatorLimits::admits(const ControlCommand& u) const {
  return std::abs(u.v) <= v_max && std::abs(u.omega) <= omega_max;
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

Pose2D step_unicycle(const Pose2D& pose, const ControlCommand& u, double t_s) {
  Pose2D next;
  if (std::abs(u.omega) > 1e-9) {
    const double th1 = pose.theta + u.omega * t_s;
    const double r = u.v / u.omega;
    next.x = pose.x + r * (std::sin(th1) - std::sin(pose.theta));
    next.y = pose.y - r * (std::cos(th1) - std::cos(pose.theta));
    next.theta = wrap_angle(th1);
  } else {
    next.x = pose.x + u.v * t_s * std::cos(pose.theta);
    next.y = pose.y + u.v * t_s * std::sin(pose.theta);
    next.theta = wrap_angle(pose.theta + u.omega * t_s);
  }
  return next;
}

Vec2 to_body(const Pose2D& robot, const Vec2& world) {
  const double c = std::cos(robot.theta), s = std::sin(robot.theta);
  const Vec2 d(world.x() - robot.x, world.y() - robot.y);
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

Vec2 to_world(const Pose2D& robot, const Vec2& body) {
  const double c = std::cos(robot.theta), s = std::sin(robot.theta);
  return {robot.x + c * body.x() - s * body.y(), robot.y + s * body.x() + c * body.y()};
}

// ---------------------------------------------------------------------------

namespace {

Vec2 sinusoid(const TagTrajectory& tr, double t) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return {tr.amp_x * std::sin(two_pi * tr.freq_x * t + tr.phase_x),
          tr.amp_y * std::sin(two_pi * tr.freq_y * t + tr.phase_y)};
}

// Seconds of motion elapsed after the stationary prefix.
double moving_time(long k, int hold_steps, double t_s) {
  return k <= hold_steps ? 0.0 : static_cast<double>(k - hold_steps) * t_s;
}

}  // namespace

Vec2 tag_position_at(long k, const TagTrajectory& traj, double t_s) {
  if (k <= traj.hold_steps) return traj.start;
  return traj.start + sinusoid(traj, static_cast<double>(k) * t_s) -
         sinusoid(traj, static_cast<double>(traj.hold_steps) * t_s);
}

Vec2 tag_position_at(long k, const TagPath& path, double t_s) {
  struct Visitor {
    long k;
    double t_s;
    Vec2 operator()(const StaticPath& p) const { return p.position; }
    Vec2 operator()(const TagTrajectory& p) const { return tag_position_at(k, p, t_s); }
    Vec2 operator()(const LinePath& p) const {
      const double s = std::min(p.length, p.speed * moving_time(k, p.hold_steps, t_s));
      return p.start + s * p.direction;
    }
    Vec2 operator()(const CirclePath& p) const {
      const double phi = p.start_angle + p.speed * moving_time(k, p.hold_steps, t_s) / p.radius;
      return p.center + p.radius * Vec2(std::cos(phi), std::sin(phi));
    }
    Vec2 operator()(const SquarePath& p) const {
      double s = std::fmod(p.speed * moving_time(k, p.hold_steps, t_s), 4.0 * p.side);
      Vec2 pos = p.start;
      Vec2 dir = p.first_leg;
      while (s > 0.0) {
        const double leg = std::min(s, p.side);
        pos += leg * dir;
        s -= leg;
        dir = Vec2(-dir.y(), dir.x());
      }
      return pos;
    }
  };
  return std::visit(Visitor{k, t_s}, path);
}

// ---------------------------------------------------------------------------

void RewardParams::validate() const {
  if (!(k_u > 0.0)) throw std::invalid_argument("k_u must be > 0");
  if (!(k_c > 0.0)) throw std::invalid_argument("k_c must be > 0");
  if (!(d_m > 0.0)) throw std::invalid_argument("d_m must be > 0");
  if (!(front_angle > 0.0)) throw std::invalid_argument("front_angle must be > 0");
}

double compute_reward(const RelPosition& tag_rel, const ControlCommand& u, const LossModel& loss,
                      const RewardParams& params) {
  if (tag_rel.norm() < params.d_m) return -params.k_c;
  const double un = u.norm();
  const double effort = un / (1.0 + un);
  const double gamma = std::atan2(tag_rel.y(), tag_rel.x());
  if (tag_rel.x() > 0.0 && std::abs(gamma) < params.front_angle) {
    const double r_l = std::max(0.0, 1.0 - loss.scaled(tag_rel));
    return r_l - params.k_u * effort;
  }
  return -params.k_u * effort;
}

// ---------------------------------------------------------------------------

std::vector<double> build_observation(const RangeHistory& history, int horizon) {
  if (horizon <= 0) throw std::invalid_argument("build_observation: horizon must be positive");
  if (history.empty()) throw std::invalid_argument("build_observation: empty range history");
  std::vector<double> obs;
  obs.reserve(3 * static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    const auto& d = history[std::min<std::size_t>(h, history.size() - 1)];
    obs.insert(obs.end(), {d[0], d[1], d[2]});
  }
  return obs;
}

// ---------------------------------------------------------------------------

int SimConfig::max_steps() const { return static_cast<int>(std::ceil(episode_seconds / t_s - 1e-9)); }
int SimConfig::hold_steps() const { return static_cast<int>(std::ceil(hold_seconds / t_s - 1e-9)); }

void SimConfig::validate() const {
  if (!(t_s > 0.0)) throw std::invalid_argument("t_s must be > 0");
  if (history < 1) throw std::invalid_argument("history must be >= 1");
  if (!(episode_seconds > 0.0) || hold_seconds < 0.0) throw std::invalid_argument("invalid episode timing");
  if (!(limits.v_max > 0.0) || !(limits.omega_max > 0.0)) throw std::invalid_argument("invalid actuator limits");
  reward.validate();
  ranging.validate();
}

const char* to_string(DoneReason r) {
  switch (r) {
    case DoneReason::running: return "running";
    case DoneReason::time_limit: return "time_limit";
    case DoneReason::collision: return "collision";
  }
  return "?";
}

Environment::Environment(SimConfig cfg, std::shared_ptr<const LossModel> loss)
    : cfg_(std::move(cfg)), loss_(std::move(loss)) {
  if (!loss_) throw std::invalid_argument("Environment: null loss model");
  cfg_.validate();
}

void Environment::reset(const TagPath& path, std::uint64_t seed, const Pose2D& start) {
  path_ = path;
  rng_.seed(seed);
  clamped_ = 0;
  state_ = EpisodeState{};
  state_.anchorbot = start;
  state_.anchorbot.theta = wrap_angle(start.theta);
  state_.t_s = cfg_.t_s;
  state_.tag_world = tag_position_at(0, path_, cfg_.t_s);
  sense();
}

void Environment::sense() {
  state_.range_history.push_front(measure_ranges(tag_relative(), layout(), cfg_.ranging, rng_, &clamped_));
  while (state_.range_history.size() > static_cast<std::size_t>(cfg_.history)) state_.range_history.pop_back();
}

StepResult Environment::step(const ControlCommand& u) {
  if (state_.done) throw std::logic_error("Environment::step called on a finished episode");
  StepResult res;
  res.applied = cfg_.limits.saturate(u);
  state_.anchorbot = step_unicycle(state_.anchorbot, res.applied, cfg_.t_s);
  ++state_.k;
  state_.tag_world = tag_position_at(state_.k, path_, cfg_.t_s);
  const RelPosition rel = tag_relative();
  res.reward = compute_reward(rel, res.applied, *loss_, cfg_.reward);
  if (rel.norm() < cfg_.reward.d_m) {
    res.done = true;
    res.reason = DoneReason::collision;
  } else {
    sense();
    if (state_.k >= cfg_.max_steps()) {
      res.done = true;
      res.reason = DoneReason::time_limit;
    }
  }
  state_.done = res.done;
  state_.reason = res.reason;
  return res;
}

std::vector<double> Environment::observation() const { return build_observation(state_.range_history, cfg_.history); }

std::array<double, 3> Environment::critic_observation() const {
  const RelPosition rel = tag_relative();
  return {rel.x(), rel.y(), state_.anchorbot.theta};
}

}  // namespace activeuwb
