// auwb: command-line front end (maps, GDOP validation, training, benchmark,
// single episodes). All outputs are CSV or binary checkpoints.
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "activeuwb/bench.hpp"
#include "activeuwb/config.hpp"
#include "activeuwb/errors.hpp"
#include "activeuwb/train.hpp"

using namespace activeuwb;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

AppConfig config_or_default(const std::string& path) { return path.empty() ? AppConfig{} : load_config(path); }

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active UWB relative localization toolkit"};
  app.require_subcommand(1);

  // gdop-map
  std::string layout = "is", out_path;
  double rmin = 0.0, rmax = 3.0, res = 0.05;
  auto* gdop_map = app.add_subcommand("gdop-map", "Analytical GDOP on a square grid (x_m,y_m,gdop)");
  gdop_map->add_option("--layout", layout, "Anchor layout")->check(CLI::IsMember({"eq", "is"}));
  gdop_map->add_option("--out", out_path, "Output CSV")->required();
  gdop_map->add_option("--rmin", rmin, "Leave cells closer than this to the body origin empty (m)");
  gdop_map->add_option("--rmax", rmax, "Grid half-width (m)");
  gdop_map->add_option("--res", res, "Grid resolution (m)");

  // validate-gdop
  int trials = 1000;
  double sigma = 0.05, angle_step = 5.0;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::vector<double> radii{0.50, 0.74, 1.00};
  auto* validate = app.add_subcommand("validate-gdop", "Analytical vs Monte Carlo GDOP on circles");
  validate->add_option("--layout", layout, "Anchor layout")->check(CLI::IsMember({"eq", "is"}));
  validate->add_option("--trials", trials, "Monte Carlo trials per point");
  validate->add_option("--sigma", sigma, "Range noise standard deviation (m)");
  validate->add_option("--radii", radii, "Circle radii (m)");
  validate->add_option("--angle-step", angle_step, "Angular sampling (deg)");
  validate->add_option("--seed", seed, "Master seed");
  validate->add_option("--workers", workers, "Worker threads (output does not depend on it)");
  validate->add_option("--out", out_path, "Output CSV")->required();

  // loss-map
  double alpha = 10.0;
  auto* loss_map = app.add_subcommand("loss-map", "Localization loss on a square grid");
  loss_map->add_option("--alpha", alpha, "Short-range error weight");
  loss_map->add_option("--layout", layout, "Anchor layout")->check(CLI::IsMember({"eq", "is"}));
  loss_map->add_option("--rmax", rmax, "Grid half-width (m)");
  loss_map->add_option("--res", res, "Grid resolution (m)");
  loss_map->add_option("--out", out_path, "Output CSV")->required();

  // train
  std::string config_path, curve_path;
  std::optional<long> steps;
  std::optional<std::uint64_t> seed_opt;
  auto* train_cmd = app.add_subcommand("train", "Train the SAC policy and write a checkpoint");
  train_cmd->add_option("--config", config_path, "JSON config (defaults when omitted)");
  train_cmd->add_option("--steps", steps, "Environment steps (overrides config)");
  train_cmd->add_option("--seed", seed_opt, "Master seed (overrides config)");
  train_cmd->add_option("--out", out_path, "Checkpoint path")->required();
  train_cmd->add_option("--curve", curve_path, "Evaluation curve CSV (step,mean_return,front_fraction)");

  // benchmark
  std::string policy_path, policy_eq_path;
  std::optional<int> realizations;
  auto* bench_cmd = app.add_subcommand("benchmark", "Table-style MLE benchmark");
  bench_cmd->add_option("--config", config_path, "JSON config (defaults when omitted)");
  bench_cmd->add_option("--policy", policy_path, "Checkpoint for AUL-IS rows");
  bench_cmd->add_option("--policy-eq", policy_eq_path, "Checkpoint for AUL-EQ rows");
  bench_cmd->add_option("--realizations", realizations, "Realizations per cell (overrides config)");
  bench_cmd->add_option("--seed", seed_opt, "Master seed (overrides config)");
  bench_cmd->add_option("--out", out_path, "Output CSV")->required();

  // episode
  std::string policy_spec = "static", mode = "front", trace_path;
  double distance = 0.85;
  auto* episode_cmd = app.add_subcommand("episode", "Run one episode and write its trace");
  episode_cmd->add_option("--config", config_path, "JSON config (defaults when omitted)");
  episode_cmd->add_option("--policy", policy_spec, "static | heuristic | CHECKPOINT");
  episode_cmd->add_option("--scenario", mode, "front | side | behind | line | circle | square");
  episode_cmd->add_option("--distance", distance, "Initial AnchorBot-TagBot distance (m)");
  episode_cmd->add_option("--layout", layout, "Anchor layout")->check(CLI::IsMember({"eq", "is"}));
  episode_cmd->add_option("--seed", seed_opt, "Noise seed (overrides config)");
  episode_cmd->add_option("--trace", trace_path, "Trace CSV")->required();

  // dump-config
  auto* dump_cmd = app.add_subcommand("dump-config", "Print the config (defaults when --config is omitted)");
  dump_cmd->add_option("--config", config_path, "JSON config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gdop_map) {
      BenchContext ctx;
      const auto lay = ctx.layout(layout);
      auto out = open_out(out_path);
      export_gdop_map(out, lay, {-rmax, rmax, -rmax, rmax, res, rmin});
    } else if (*validate) {
      BenchContext ctx;
      const auto samples = validate_gdop(ctx.layout(layout), radii, angle_step, trials, sigma, seed, workers);
      auto out = open_out(out_path);
      write_gdop_validation_csv(out, samples);
      double worst = 0.0;
      for (const auto& s : samples) {
        if (!s.singular) worst = std::max(worst, s.relative_error());
      }
      fmt::print(std::cerr, "{} points, max relative disagreement {:.4f}\n", samples.size(), worst);
    } else if (*loss_map) {
      BenchContext ctx;
      ctx.alpha = alpha;
      const auto model = ctx.loss_model(upper(layout));
      auto out = open_out(out_path);
      export_loss_map(out, *model, {-rmax, rmax, -rmax, rmax, res});
      const auto& e = model->extrema();
      fmt::print(std::cerr, "l_min {:.4f} at ({:.3f}, {:.3f}); l_max {:.4f} at ({:.3f}, {:.3f})\n", e.l_min,
                 e.argmin.x(), e.argmin.y(), e.l_max, e.argmax.x(), e.argmax.y());
    } else if (*train_cmd) {
      auto cfg = config_or_default(config_path);
      if (steps) cfg.train.total_steps = *steps;
      if (seed_opt) cfg.seed = *seed_opt;
      cfg.validate();
      BenchContext ctx = cfg.bench_context();
      const auto loss = ctx.loss_model("IS");
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = train(cfg.sim, loss, cfg.train, cfg.seed, [&](const EvalPoint& p, const auto& d) {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        fmt::print(std::cerr, "step {:>8}  return {:8.2f}  front {:.2f}  critic {:.4f}  temp {:.4f}  [{:.0f}s]\n",
                   p.step, p.mean_return, p.front_fraction, d.critic_loss, d.temperature, s);
      });
      save_policy(result.policy, out_path);
      if (!curve_path.empty()) {
        auto out = open_out(curve_path);
        out << "step,mean_return,front_fraction\n";
        for (const auto& p : result.eval_curve) fmt::print(out, "{},{:.6f},{:.6f}\n", p.step, p.mean_return, p.front_fraction);
      }
      fmt::print(std::cerr, "{} episodes, {} updates, checkpoint {}\n", result.episode_returns.size(), result.updates,
                 out_path);
    } else if (*bench_cmd) {
      auto cfg = config_or_default(config_path);
      if (seed_opt) cfg.seed = *seed_opt;
      if (realizations) cfg.bench.realizations = *realizations;
      cfg.validate();
      BenchContext ctx = cfg.bench_context();
      if (!policy_path.empty()) ctx.learned["IS"] = std::make_shared<const SacPolicy>(load_policy(policy_path));
      if (!policy_eq_path.empty()) ctx.learned["EQ"] = std::make_shared<const SacPolicy>(load_policy(policy_eq_path));
      const auto rows = run_benchmark(cfg.bench.scenarios(), ctx, cfg.seed, &std::cerr);
      auto out = open_out(out_path);
      write_benchmark_csv(out, rows);
    } else if (*episode_cmd) {
      auto cfg = config_or_default(config_path);
      if (seed_opt) cfg.seed = *seed_opt;
      BenchContext ctx = cfg.bench_context();
      Scenario sc;
      sc.layout = upper(layout);
      sc.init_distance = distance;
      sc.mode = parse_mode(mode);
      if (policy_spec == "static") {
        sc.method = Method::SUL;
      } else if (policy_spec == "heuristic") {
        sc.method = Method::HEU;
      } else {
        sc.method = Method::AUL;
        ctx.learned[sc.layout] = std::make_shared<const SacPolicy>(load_policy(policy_spec));
      }
      auto policy = make_policy(sc, ctx);
      Environment env(cfg.sim, ctx.loss_model(sc.layout));
      const auto trace = run_episode(*policy, env, make_tag_path(sc, ctx.paths), cfg.seed);
      auto out = open_out(trace_path);
      write_trace_csv(out, trace);
      fmt::print(std::cerr, "{} steps, ended by {}, MLE {:.2f} cm, return {:.2f}\n", trace.steps.size(),
                 to_string(trace.reason), compute_mle(trace), trace.total_reward());
    } else if (*dump_cmd) {
      std::cout << dump_config(config_or_default(config_path));
    }
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
