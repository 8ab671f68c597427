#include "activeuwb/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace activeuwb {

using nlohmann::json;

namespace {

// Reads `key` into `dst` when present and records it as known.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw std::invalid_argument("config: " + where_ + " must be an object");
  }

  template <typename T>
  Reader& get(const char* key, T& dst) {
    seen_.insert(key);
    if (j_.contains(key)) {
      try {
        dst = j_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw std::invalid_argument("config: " + where_ + "." + key + ": " + e.what());
      }
    }
    return *this;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw std::invalid_argument("config: unknown key " + where_ + "." + k);
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

AppConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  AppConfig c;
  Reader top(root, "root");
  top.get("seed", c.seed).get("workers", c.workers);

  if (const json* s = top.child("sim")) {
    Reader r(*s, "sim");
    r.get("t_s", c.sim.t_s)
        .get("history", c.sim.history)
        .get("episode_seconds", c.sim.episode_seconds)
        .get("hold_seconds", c.sim.hold_seconds)
        .get("v_max", c.sim.limits.v_max)
        .get("omega_max", c.sim.limits.omega_max);
    r.finish();
  }
  if (const json* s = top.child("reward")) {
    Reader r(*s, "reward");
    r.get("k_u", c.sim.reward.k_u)
        .get("k_c", c.sim.reward.k_c)
        .get("d_m", c.sim.reward.d_m)
        .get("front_angle", c.sim.reward.front_angle);
    r.finish();
  }
  if (const json* s = top.child("ranging")) {
    Reader r(*s, "ranging");
    r.get("sigma_range", c.sim.ranging.sigma_range)
        .get("c1", c.sim.ranging.c1)
        .get("k1", c.sim.ranging.k1)
        .get("min_valid_range", c.sim.ranging.min_valid_range);
    r.finish();
  }
  if (const json* s = top.child("loss")) {
    Reader r(*s, "loss");
    r.get("alpha", c.alpha)
        .get("r_inner", c.domain.r_inner)
        .get("r_outer", c.domain.r_outer)
        .get("radial_step", c.domain.radial_step)
        .get("angular_step_deg", c.domain.angular_step_deg);
    r.finish();
  }
  if (const json* s = top.child("layouts")) {
    Reader r(*s, "layouts");
    r.get("eq_side", c.eq_side);
    r.finish();
  }
  if (const json* s = top.child("train")) {
    Reader r(*s, "train");
    auto& t = c.train;
    r.get("learning_rate", t.learning_rate)
        .get("discount", t.discount)
        .get("batch_size", t.batch_size)
        .get("polyak_tau", t.polyak_tau)
        .get("buffer_capacity", t.buffer_capacity)
        .get("warmup_steps", t.warmup_steps)
        .get("target_entropy", t.target_entropy)
        .get("init_temperature", t.init_temperature)
        .get("total_steps", t.total_steps)
        .get("eval_every", t.eval_every)
        .get("eval_episodes", t.eval_episodes)
        .get("hidden_width", t.hidden_width)
        .get("hidden_layers", t.hidden_layers);
    if (const json* sc = r.child("scenario")) {
      Reader q(*sc, "train.scenario");
      auto& s2 = t.scenario;
      q.get("spawn_min", s2.spawn_min)
          .get("spawn_max", s2.spawn_max)
          .get("amp_min", s2.amp_min)
          .get("amp_max", s2.amp_max)
          .get("freq_min", s2.freq_min)
          .get("freq_max", s2.freq_max)
          .get("phase_min", s2.phase_min)
          .get("phase_max", s2.phase_max);
      q.finish();
    }
    r.finish();
  }
  if (const json* s = top.child("benchmark")) {
    Reader r(*s, "benchmark");
    r.get("methods", c.bench.methods)
        .get("init_distances", c.bench.init_distances)
        .get("modes", c.bench.modes)
        .get("realizations", c.bench.realizations);
    if (const json* p = r.child("paths")) {
      Reader q(*p, "benchmark.paths");
      q.get("line_length", c.paths.line_length)
          .get("line_speed", c.paths.line_speed)
          .get("circle_speed", c.paths.circle_speed)
          .get("square_side", c.paths.square_side)
          .get("square_speed", c.paths.square_speed);
      q.finish();
    }
    if (const json* h = r.child("heuristic")) {
      Reader q(*h, "benchmark.heuristic");
      q.get("k_v", c.heuristic_gains.k_v).get("k_theta", c.heuristic_gains.k_theta);
      q.finish();
    }
    r.finish();
  }
  top.finish();
  c.train.eval_workers = c.workers;
  c.validate();
  return c;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const AppConfig& c) {
  const auto& t = c.train;
  json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["sim"] = {{"t_s", c.sim.t_s},
              {"history", c.sim.history},
              {"episode_seconds", c.sim.episode_seconds},
              {"hold_seconds", c.sim.hold_seconds},
              {"v_max", c.sim.limits.v_max},
              {"omega_max", c.sim.limits.omega_max}};
  j["reward"] = {{"k_u", c.sim.reward.k_u},
                 {"k_c", c.sim.reward.k_c},
                 {"d_m", c.sim.reward.d_m},
                 {"front_angle", c.sim.reward.front_angle}};
  j["ranging"] = {{"sigma_range", c.sim.ranging.sigma_range},
                  {"c1", c.sim.ranging.c1},
                  {"k1", c.sim.ranging.k1},
                  {"min_valid_range", c.sim.ranging.min_valid_range}};
  j["loss"] = {{"alpha", c.alpha},
               {"r_inner", c.domain.r_inner},
               {"r_outer", c.domain.r_outer},
               {"radial_step", c.domain.radial_step},
               {"angular_step_deg", c.domain.angular_step_deg}};
  j["layouts"] = {{"eq_side", c.eq_side}};
  j["train"] = {{"learning_rate", t.learning_rate},
                {"discount", t.discount},
                {"batch_size", t.batch_size},
                {"polyak_tau", t.polyak_tau},
                {"buffer_capacity", t.buffer_capacity},
                {"warmup_steps", t.warmup_steps},
                {"target_entropy", t.target_entropy},
                {"init_temperature", t.init_temperature},
                {"total_steps", t.total_steps},
                {"eval_every", t.eval_every},
                {"eval_episodes", t.eval_episodes},
                {"hidden_width", t.hidden_width},
                {"hidden_layers", t.hidden_layers},
                {"scenario",
                 {{"spawn_min", t.scenario.spawn_min},
                  {"spawn_max", t.scenario.spawn_max},
                  {"amp_min", t.scenario.amp_min},
                  {"amp_max", t.scenario.amp_max},
                  {"freq_min", t.scenario.freq_min},
                  {"freq_max", t.scenario.freq_max},
                  {"phase_min", t.scenario.phase_min},
                  {"phase_max", t.scenario.phase_max}}}};
  j["benchmark"] = {{"methods", c.bench.methods},
                    {"init_distances", c.bench.init_distances},
                    {"modes", c.bench.modes},
                    {"realizations", c.bench.realizations},
                    {"paths",
                     {{"line_length", c.paths.line_length},
                      {"line_speed", c.paths.line_speed},
                      {"circle_speed", c.paths.circle_speed},
                      {"square_side", c.paths.square_side},
                      {"square_speed", c.paths.square_speed}}},
                    {"heuristic", {{"k_v", c.heuristic_gains.k_v}, {"k_theta", c.heuristic_gains.k_theta}}}};
  return j.dump(2) + "\n";
}

void AppConfig::validate() const {
  sim.validate();
  train.validate();
  if (!(alpha >= 0.0)) throw std::invalid_argument("config: alpha must be >= 0");
  if (!(eq_side > 0.0)) throw std::invalid_argument("config: eq_side must be > 0");
  if (!(domain.r_inner > 0.0 && domain.r_inner < domain.r_outer)) throw std::invalid_argument("config: bad annulus");
  if (bench.realizations <= 0) throw std::invalid_argument("config: realizations must be positive");
  (void)bench.scenarios();  // parses method/mode names
}

BenchContext AppConfig::bench_context() const {
  BenchContext ctx;
  ctx.sim = sim;
  ctx.alpha = alpha;
  ctx.domain = domain;
  ctx.eq_side = eq_side;
  ctx.paths = paths;
  ctx.heuristic_gains = heuristic_gains;
  ctx.workers = workers;
  return ctx;
}

}  // namespace activeuwb
