#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "activeuwb/policy.hpp"
#include "activeuwb/sim.hpp"

namespace activeuwb {

/// One control step. Row k holds the state observed at step k (ranges,
/// NLLS estimate, true relative tag position), the command u(k) issued from
/// it and the reward of the resulting transition.
struct TraceStep {
  long k = 0;
  double time = 0.0;  // s
  Pose2D anchorbot{};
  Vec2 tag_world = Vec2::Zero();
  RelPosition tag_rel = RelPosition::Zero();
  RelPosition estimate = RelPosition::Zero();
  RangeTriple ranges = RangeTriple::Zero();
  ControlCommand u{};
  double reward = 0.0;
  double gdop = 0.0;  // analytical GDOP at tag_rel; NaN where singular
};

struct EpisodeTrace {
  std::vector<TraceStep> steps;
  DoneReason reason = DoneReason::running;
  int clamped_ranges = 0;

  double total_reward() const;
};

/// Runs one episode of `policy` on `env` with the tag following `path`.
/// The tag position is trilaterated at every step, warm-started at the
/// previous estimate (the true position for the first solve).
EpisodeTrace run_episode(Policy& policy, Environment& env, const TagPath& path, std::uint64_t seed,
                         const Pose2D& start = {});

/// CSV with header k,t_s,ax,ay,atheta,tx,ty,est_x,est_y,d1,d2,d3,v,omega,reward,gdop.
/// tx,ty and est_x,est_y are body-frame; ax,ay,atheta is the world pose.
void write_trace_csv(std::ostream& out, const EpisodeTrace& trace);

}  // namespace activeuwb
