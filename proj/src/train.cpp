#include "activeuwb/train.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "activeuwb/parallel.hpp"

namespace activeuwb {

void TrainingScenario::validate() const {
  if (!(0.0 < spawn_min && spawn_min <= spawn_max)) throw std::invalid_argument("scenario: bad spawn range");
  if (!(0.0 <= amp_min && amp_min <= amp_max)) throw std::invalid_argument("scenario: bad amplitude range");
  if (!(0.0 <= freq_min && freq_min <= freq_max)) throw std::invalid_argument("scenario: bad frequency range");
  if (!(phase_min <= phase_max)) throw std::invalid_argument("scenario: bad phase range");
}

TagTrajectory sample_training_trajectory(const TrainingScenario& sc, int hold_steps, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto draw = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  TagTrajectory t;
  const double d = draw(sc.spawn_min, sc.spawn_max);
  const double b = draw(0.0, 2.0 * std::numbers::pi);
  t.start = Vec2(d * std::cos(b), d * std::sin(b));
  t.amp_x = draw(sc.amp_min, sc.amp_max);
  t.amp_y = draw(sc.amp_min, sc.amp_max);
  t.freq_x = draw(sc.freq_min, sc.freq_max);
  t.freq_y = draw(sc.freq_min, sc.freq_max);
  t.phase_x = draw(sc.phase_min, sc.phase_max);
  t.phase_y = draw(sc.phase_min, sc.phase_max);
  t.hold_steps = hold_steps;
  return t;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("discount must be in (0, 1)");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (buffer_capacity < static_cast<std::size_t>(batch_size)) throw std::invalid_argument("buffer smaller than batch");
  if (warmup_steps < 0 || total_steps < 0) throw std::invalid_argument("step counts must be non-negative");
  if (eval_every <= 0 || eval_episodes <= 0) throw std::invalid_argument("evaluation cadence must be positive");
  scenario.validate();
}

SacConfig TrainConfig::sac_config(const SimConfig& sim) const {
  SacConfig c;
  c.obs_dim = 3 * sim.history;
  c.critic_obs_dim = 3;
  c.action_dim = 2;
  c.hidden_width = hidden_width;
  c.hidden_layers = hidden_layers;
  c.learning_rate = learning_rate;
  c.discount = discount;
  c.polyak_tau = polyak_tau;
  c.target_entropy = target_entropy;
  c.init_temperature = init_temperature;
  return c;
}

namespace {

bool in_front(const RelPosition& p, double front_angle) {
  return p.x() > 0.0 && std::abs(std::atan2(p.y(), p.x())) < front_angle;
}

enum Stream : std::uint64_t { kInit = 1, kScenario = 2, kAgent = 3, kNoise = 4, kEval = 5 };

}  // namespace

EvalPoint evaluate_policy(const Policy& policy, const SimConfig& sim, std::shared_ptr<const LossModel> loss,
                          const TrainingScenario& scenario, int episodes, std::uint64_t seed, unsigned workers) {
  std::vector<double> returns(static_cast<std::size_t>(episodes)), front(returns.size());
  parallel_for(returns.size(), workers, [&](std::size_t i) {
    auto pol = policy.clone();
    pol->reset();
    Environment env(sim, loss);
    Rng rng = make_rng(seed, 2 * i);
    const auto traj = sample_training_trajectory(scenario, sim.hold_steps(), rng);
    env.reset(traj, derive_seed(seed, 2 * i + 1));
    double ret = 0.0;
    long moving = 0, ahead = 0;
    while (true) {
      const auto obs = env.observation();
      const auto res = env.step(pol->act(obs));
      ret += res.reward;
      if (env.state().k > sim.hold_steps()) {
        ++moving;
        if (res.reason != DoneReason::collision && in_front(env.tag_relative(), sim.reward.front_angle)) ++ahead;
      }
      if (res.done) break;
    }
    returns[i] = ret;
    front[i] = moving > 0 ? static_cast<double>(ahead) / static_cast<double>(moving) : 0.0;
  });
  EvalPoint p;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    p.mean_return += returns[i];
    p.front_fraction += front[i];
  }
  p.mean_return /= static_cast<double>(episodes);
  p.front_fraction /= static_cast<double>(episodes);
  return p;
}

TrainResult train(const SimConfig& sim, std::shared_ptr<const LossModel> loss, const TrainConfig& cfg,
                  std::uint64_t seed, const TrainProgress& progress) {
  sim.validate();
  cfg.validate();
  Rng init_rng = make_rng(seed, kInit);
  Rng scenario_rng = make_rng(seed, kScenario);
  Rng agent_rng = make_rng(seed, kAgent);
  const std::uint64_t eval_seed = derive_seed(seed, kEval);

  SacAgent<float> agent(cfg.sac_config(sim), init_rng);
  ReplayBuffer<float> buffer(cfg.buffer_capacity, 3 * sim.history, 3, 2);
  const auto& lim = sim.limits;
  auto policy_snapshot = [&] {
    return SacPolicy(agent.actor(), lim, sim.history, loss->config().layout.anchors());
  };

  std::vector<double> returns;
  std::vector<EvalPoint> curve;
  SacAgent<float>::Diagnostics last{};
  auto run_eval = [&](long step) {
    EvalPoint p = evaluate_policy(policy_snapshot(), sim, loss, cfg.scenario, cfg.eval_episodes, eval_seed,
                                  cfg.eval_workers);
    p.step = step;
    curve.push_back(p);
    if (progress) progress(p, last);
  };

  Environment env(sim, loss);
  long episode = 0;
  auto new_episode = [&] {
    const auto traj = sample_training_trajectory(cfg.scenario, sim.hold_steps(), scenario_rng);
    env.reset(traj, derive_seed(seed, (kNoise << 32) + static_cast<std::uint64_t>(episode++)));
  };
  new_episode();
  run_eval(0);

  std::uniform_real_distribution<double> uniform_action(-1.0, 1.0);
  std::vector<double> obs = env.observation();
  std::array<double, 3> cobs = env.critic_observation();
  double ep_return = 0.0;
  long updates = 0;
  for (long step = 1; step <= cfg.total_steps; ++step) {
    std::array<double, 2> a{};
    if (step <= cfg.warmup_steps) {
      a = {uniform_action(agent_rng), uniform_action(agent_rng)};
    } else {
      Mlp<float>::Matrix x(static_cast<Eigen::Index>(obs.size()), 1);
      for (std::size_t i = 0; i < obs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = static_cast<float>(obs[i]);
      const auto s = agent.sample_action(x, agent_rng);
      a = {static_cast<double>(s(0, 0)), static_cast<double>(s(1, 0))};
    }
    const auto res = env.step({a[0] * lim.v_max, a[1] * lim.omega_max});
    const auto next_obs = env.observation();
    const auto next_cobs = env.critic_observation();
    // time-limit truncation is not a terminal state for bootstrapping
    buffer.add(obs, cobs, a, res.reward, next_obs, next_cobs, res.reason == DoneReason::collision);
    ep_return += res.reward;

    if (step > cfg.warmup_steps && buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      last = agent.update(buffer.sample(static_cast<std::size_t>(cfg.batch_size), agent_rng), agent_rng);
      ++updates;
    }

    if (res.done) {
      returns.push_back(ep_return);
      ep_return = 0.0;
      new_episode();
      obs = env.observation();
      cobs = env.critic_observation();
    } else {
      obs = next_obs;
      cobs = next_cobs;
    }
    if (step % cfg.eval_every == 0) run_eval(step);
  }

  TrainResult out{policy_snapshot(), std::move(returns), std::move(curve), buffer.size(), cfg.total_steps, updates,
                  last};
  return out;
}

}  // namespace activeuwb
