#include "activeuwb/episode.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "activeuwb/errors.hpp"

namespace activeuwb {

double EpisodeTrace::total_reward() const {
  double sum = 0.0;
  for (const auto& s : steps) sum += s.reward;
  return sum;
}

EpisodeTrace run_episode(Policy& policy, Environment& env, const TagPath& path, std::uint64_t seed,
                         const Pose2D& start) {
  policy.reset();
  env.reset(path, seed, start);
  const SolverOptions solver = solver_options_for(env.config().ranging);

  EpisodeTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(env.config().max_steps()));
  RelPosition guess = env.tag_relative();
  while (true) {
    TraceStep row;
    row.k = env.state().k;
    row.time = static_cast<double>(row.k) * env.config().t_s;
    row.anchorbot = env.state().anchorbot;
    row.tag_world = env.state().tag_world;
    row.tag_rel = env.tag_relative();
    row.ranges = env.latest_ranges();
    try {
      row.gdop = gdop_analytical(row.tag_rel, env.layout());
    } catch (const SingularGeometry&) {
      row.gdop = std::numeric_limits<double>::quiet_NaN();
    }
    try {
      row.estimate = trilaterate(row.ranges, env.layout(), guess, solver).position;
    } catch (const DegenerateGeometry&) {
      row.estimate = trilaterate(row.ranges, env.layout(), row.tag_rel, solver).position;
    }
    guess = row.estimate;

    const std::vector<double> obs = env.observation();
    const ControlCommand u = policy.act(obs);
    const StepResult res = env.step(u);
    row.u = res.applied;
    row.reward = res.reward;
    trace.steps.push_back(row);
    if (res.done) {
      trace.reason = res.reason;
      break;
    }
  }
  trace.clamped_ranges = env.clamp_count();
  return trace;
}

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace) {
  out << "k,t_s,ax,ay,atheta,tx,ty,est_x,est_y,d1,d2,d3,v,omega,reward,gdop\n";
  for (const auto& s : trace.steps) {
    fmt::print(out, "{},{:.3f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},",
               s.k, s.time, s.anchorbot.x, s.anchorbot.y, s.anchorbot.theta, s.tag_rel.x(), s.tag_rel.y(),
               s.estimate.x(), s.estimate.y(), s.ranges[0], s.ranges[1], s.ranges[2], s.u.v, s.u.omega, s.reward);
    if (std::isfinite(s.gdop)) fmt::print(out, "{:.6f}", s.gdop);
    out << '\n';
  }
}

}  // namespace activeuwb
