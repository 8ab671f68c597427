// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <queue>
#include <sstream>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "activeuwb/bench.hpp"
#include "activeuwb/config.hpp"
#include "activeuwb/estimation.hpp"
#include "activeuwb/loss.hpp"
#include "activeuwb/mlp.hpp"
#include "activeuwb/parallel.hpp"
#include "activeuwb/sac.hpp"
#include "activeuwb/train.hpp"

using namespace activeuwb;
namespace fs = std::filesystem;

namespace tol {
constexpr double gdop_rel = 0.10;
constexpr double eq_ring_target = 2.5, eq_ring_slack = 0.2;
constexpr double is_front_max = 2.0;
constexpr double sublevel = 0.05;
constexpr double loss_grid = 0.01;  // m
constexpr double noiseless_err = 1e-6;
constexpr double mean_err = 0.005;
constexpr double static_rel = 0.20;
constexpr double line_rel = 0.25;
constexpr double reduction = 0.40;
constexpr double spread_cm = 5.0;
constexpr double grad_rel = 1e-4;
constexpr double bandit_err = 0.05;
constexpr double return_ratio = 3.0;
}  // namespace tol

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, double seconds) {
  if (!ok) ++failures;
  fmt::print("{} {:>2} {} [{:.1f} s]\n", ok ? "PASS" : "FAIL", id, what, seconds);
  std::fflush(stdout);
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- 1 -------------------------------------------------------------------
void gdop_validation(unsigned workers) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string where;
  for (const char* name : {"eq", "is"}) {
    const auto samples = validate_gdop(AnchorLayout::from_name(name), {0.50, 0.74, 1.00}, 5.0, 1000, 0.05, 1, workers);
    for (const auto& s : samples) {
      if (s.singular) continue;
      if (s.relative_error() > worst) {
        worst = s.relative_error();
        where = fmt::format("{} r={:.2f} {:.0f}deg", name, s.radius_m, s.angle_deg);
      }
    }
  }
  const double t = since(t0);
  report(1, worst <= tol::gdop_rel && t < 120.0,
         fmt::format("GDOP validation: max relative disagreement {:.3f} at {} (tol {:.2f})", worst, where, tol::gdop_rel),
         t);
}

// --- 2 -------------------------------------------------------------------
void configuration_facts() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto eq = AnchorLayout::equilateral();
  const auto is = AnchorLayout::isosceles();
  double eq_min = 1e9, is_min = 1e9;
  for (int k = 0; k < 3600; ++k) {
    const double a = k * std::numbers::pi / 1800.0;
    const Vec2 u(std::cos(a), std::sin(a));
    eq_min = std::min(eq_min, gdop_analytical(0.70 * u, eq));
    if (std::abs(std::remainder(a, 2 * std::numbers::pi)) < std::numbers::pi / 4) {
      for (double r = 0.35; r <= 3.0 + 1e-9; r += 0.01) is_min = std::min(is_min, gdop_analytical(r * u, is));
    }
  }
  const bool ok = std::abs(eq_min - tol::eq_ring_target) <= tol::eq_ring_slack && is_min < tol::is_front_max;
  report(2, ok, fmt::format("configuration: EQ ring minimum {:.3f} (2.5 +- 0.2), IS front minimum {:.3f} (< 2.0)", eq_min, is_min),
         since(t0));
}

// --- 3 -------------------------------------------------------------------
void loss_landscape() {
  const auto t0 = std::chrono::steady_clock::now();
  const AnnulusDomain dom;
  const LossModel model(LossConfig{}, dom);
  const int n = static_cast<int>(std::lround(2 * dom.r_outer / tol::loss_grid)) + 1;
  auto coord = [&](int i) { return -dom.r_outer + i * tol::loss_grid; };
  std::vector<char> in(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 p(coord(i), coord(j));
      if (!dom.contains(p)) continue;
      double s;
      try {
        s = model.scaled(p);
      } catch (const std::exception&) {
        continue;
      }
      in[static_cast<std::size_t>(i) * n + j] = std::isfinite(s) && s < tol::sublevel;
    }
  // 8-connected components
  std::vector<int> label(in.size(), -1);
  int components = 0, behind = 0;
  double worst_x = 1e9;
  for (std::size_t start = 0; start < in.size(); ++start) {
    if (!in[start] || label[start] >= 0) continue;
    bool front_only = true;
    std::queue<std::size_t> q;
    q.push(start);
    label[start] = components;
    while (!q.empty()) {
      const auto c = q.front();
      q.pop();
      const int i = static_cast<int>(c / n), j = static_cast<int>(c % n);
      if (coord(i) <= 0.0) {
        front_only = false;
        worst_x = std::min(worst_x, coord(i));
      }
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int a = i + di, b = j + dj;
          if (a < 0 || b < 0 || a >= n || b >= n) continue;
          const auto nb = static_cast<std::size_t>(a) * n + b;
          if (in[nb] && label[nb] < 0) {
            label[nb] = components;
            q.push(nb);
          }
        }
    }
    ++components;
    if (!front_only) ++behind;
  }
  std::string detail = fmt::format("{} component(s), {} reaching x <= 0", components, behind);
  if (behind > 0) detail += fmt::format(" (down to x = {:.2f} m)", worst_x);
  report(3, components == 1 && behind == 0,
         fmt::format("loss landscape: scaled loss < {:.2f} sub-level set has {}", tol::sublevel, detail), since(t0));
}

// --- 4 -------------------------------------------------------------------
void estimator_properties() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto is = AnchorLayout::isosceles();
  Rng rng = make_rng(1, 0);
  std::uniform_real_distribution<double> rad(0.4, 3.0), ang(-std::numbers::pi, std::numbers::pi), jit(-0.1, 0.1);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double r = rad(rng), a = ang(rng);
    const Vec2 p(r * std::cos(a), r * std::sin(a));
    const auto est = trilaterate(true_ranges(p, is), is, p + Vec2(jit(rng), jit(rng)));
    worst = std::max(worst, (est.position - p).norm());
  }
  RangingModel model;
  const auto opt = solver_options_for(model);
  const Vec2 tag(1.0, 0.0);
  Vec2 mean = Vec2::Zero();
  const int trials = 10000;
  for (int j = 0; j < trials; ++j) {
    Rng r = make_rng(1, j + 1);
    mean += trilaterate(measure_ranges(tag, is, model, r), is, tag, opt).position - tag;
  }
  mean /= trials;
  const bool ok = worst < tol::noiseless_err && std::abs(mean.x()) < tol::mean_err && std::abs(mean.y()) < tol::mean_err;
  report(4, ok,
         fmt::format("estimator: noiseless max error {:.2e} m (< 1e-6), mean error at (1,0) = ({:+.4f}, {:+.4f}) m "
                     "(|.| < {:.3f})",
                     worst, mean.x(), mean.y(), tol::mean_err),
         since(t0));
}

// --- 5 -------------------------------------------------------------------
void static_baseline(const BenchContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Ref {
    double d;
    TagMode mode;
    double mu;
    double rel;
  };
  const Ref refs[] = {{0.70, TagMode::front, 11.0, tol::static_rel},
                      {1.00, TagMode::front, 15.9, tol::static_rel},
                      {2.00, TagMode::front, 33.2, tol::static_rel},
                      {1.50, TagMode::line, 42.1, tol::line_rel}};
  std::vector<Scenario> cells;
  for (const auto& r : refs) cells.push_back({Method::SUL, "EQ", r.d, r.mode, 1000});
  const auto rows = run_benchmark(cells, ctx, 1);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double mu = rows[i].error ? NAN : rows[i].report.mu_cm;
    const bool cell_ok = std::abs(mu - refs[i].mu) <= refs[i].rel * refs[i].mu;
    ok = ok && cell_ok;
    detail += fmt::format("{}{} {:.1f} (ref {:.1f})", i ? ", " : "", rows[i].scenario.label(), mu, refs[i].mu);
  }
  const double t = since(t0);
  report(5, ok && t < 600.0, "static baseline: " + detail, t);
}

// --- desk-scale training, cached between runs ------------------------------
struct Trained {
  std::shared_ptr<const SacPolicy> policy;
  std::vector<EvalPoint> curve;
  std::string checkpoint;
  double seconds = 0.0;
  bool cached = false;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

Trained desk_training(const AppConfig& cfg, const fs::path& cache_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string key = fmt::format("{:016x}", fnv1a(dump_config(cfg)));
  const fs::path ckpt = cache_dir / ("policy_" + key + ".bin");
  const fs::path curve = cache_dir / ("curve_" + key + ".csv");
  Trained out;
  out.checkpoint = ckpt.string();
  if (fs::exists(ckpt) && fs::exists(curve)) {
    try {
      out.policy = std::make_shared<const SacPolicy>(load_policy(ckpt.string()));
      std::ifstream in(curve);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        EvalPoint p;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &p.step, &p.mean_return, &p.front_fraction) == 3)
          out.curve.push_back(p);
      }
      out.cached = !out.curve.empty();
    } catch (const std::exception&) {
      out.cached = false;
    }
  }
  if (!out.cached) {
    const auto ctx = cfg.bench_context();
    const auto result = train(cfg.sim, ctx.loss_model("IS"), cfg.train, cfg.seed, [](const EvalPoint& p, const auto&) {
      std::fprintf(stderr, "  train step %7ld  eval return %8.2f  front %.2f\n", p.step, p.mean_return, p.front_fraction);
    });
    out.policy = std::make_shared<const SacPolicy>(result.policy);
    out.curve = result.eval_curve;
    fs::create_directories(cache_dir);
    save_policy(result.policy, ckpt.string());
    std::ofstream os(curve);
    os << "step,mean_return,front_fraction\n";
    for (const auto& p : out.curve) os << fmt::format("{},{:.17g},{:.17g}\n", p.step, p.mean_return, p.front_fraction);
  }
  out.seconds = since(t0);
  return out;
}

// --- 6 -------------------------------------------------------------------
void active_improvement(BenchContext ctx, const Trained& trained) {
  const auto t0 = std::chrono::steady_clock::now();
  ctx.learned["IS"] = trained.policy;
  const int n = 200;
  const auto rows = run_benchmark({{Method::SUL, "EQ", 1.5, TagMode::line, n},
                                   {Method::AUL, "IS", 1.5, TagMode::line, n},
                                   {Method::HEU, "IS", 1.5, TagMode::line, n}},
                                  ctx, 1);
  auto mu = [&](int i) { return rows[i].error ? NAN : rows[i].report.mu_cm; };
  const double red_aul = 1.0 - mu(1) / mu(0), red_heu = 1.0 - mu(2) / mu(0);
  const bool aul_ok = red_aul >= tol::reduction;
  const bool heu_ok = red_heu >= tol::reduction;
  std::string detail = fmt::format("active improvement, line 150 cm, {} runs: SUL-EQ {:.1f} cm, AUL-IS {:.1f} cm ({:.0f}%), "
                                   "heuristic {:.1f} cm ({:.0f}%), need >= {:.0f}%",
                                   n, mu(0), mu(1), 100 * red_aul, mu(2), 100 * red_heu, 100 * tol::reduction);
  if (!aul_ok && heu_ok) detail += " [heuristic fallback]";
  report(6, aul_ok || heu_ok, detail, since(t0));
}

// --- 7 -------------------------------------------------------------------
void position_independence(BenchContext ctx, const Trained& trained) {
  const auto t0 = std::chrono::steady_clock::now();
  ctx.learned["IS"] = trained.policy;
  std::vector<Scenario> cells;
  for (const auto m : {TagMode::front, TagMode::side, TagMode::behind, TagMode::line, TagMode::circle, TagMode::square})
    cells.push_back({Method::AUL, "IS", 0.85, m, 200});
  double lo = 1e9, hi = -1e9;
  std::string detail;
  bool all_ran = true;
  for (const auto& row : run_benchmark(cells, ctx, 1)) {
    if (row.error) {
      all_ran = false;
      continue;
    }
    lo = std::min(lo, row.report.mu_cm);
    hi = std::max(hi, row.report.mu_cm);
    detail += fmt::format(" {}={:.1f}", to_string(row.scenario.mode), row.report.mu_cm);
  }
  report(7, all_ran && hi - lo < tol::spread_cm,
         fmt::format("position independence, AUL-IS 85 cm:{} -> spread {:.2f} cm (< {:.0f})", detail, hi - lo,
                     tol::spread_cm),
         since(t0));
}

// --- 8 -------------------------------------------------------------------
template <typename F>
Eigen::VectorXd numeric_gradient(Eigen::VectorXd& v, F f) {
  const double h = 1e-5;
  Eigen::VectorXd g(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + h;
    const double up = f();
    v[i] = keep - h;
    const double down = f();
    v[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-12, a.norm() + b.norm());
}

Eigen::MatrixXd gaussian(int r, int c, Rng& rng) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

void gradient_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(1, 8);
  double worst_mlp = 0.0;
  for (const auto tr : {OutputTransform::identity, OutputTransform::tanh_scaled}) {
    Mlp<double> net({3, 16, 16, 2}, tr, {0.8});
    net.init_uniform(rng);
    const auto x = gaussian(3, 5, rng), w = gaussian(2, 5, rng);
    Mlp<double>::Cache cache;
    net.forward(x, cache);
    const auto g = net.parameter_gradient(cache, w);
    worst_mlp = std::max(worst_mlp, rel_error(g, numeric_gradient(net.parameters(), [&] {
                                                return net.forward(x).cwiseProduct(w).sum();
                                              })));
  }
  SacConfig sc;
  sc.obs_dim = 6;
  sc.hidden_width = 16;
  sc.hidden_layers = 2;
  SacAgent<double> agent(sc, rng);
  const auto obs = gaussian(6, 8, rng), cobs = gaussian(3, 8, rng), noise = gaussian(2, 8, rng);
  const auto al = agent.actor_loss(obs, cobs, noise, 0.4);
  const double worst_actor = rel_error(al.grad, numeric_gradient(agent.actor().parameters(), [&] {
                                         return agent.actor_loss(obs, cobs, noise, 0.4, false).loss;
                                       }));
  report(8, worst_mlp < tol::grad_rel && worst_actor < tol::grad_rel,
         fmt::format("gradient checks: MLP {:.2e}, SAC actor {:.2e} (< 1e-4)", worst_mlp, worst_actor), since(t0));
}

// --- 9 -------------------------------------------------------------------
void sac_sanity(const Trained& trained, long total_steps) {
  const auto t0 = std::chrono::steady_clock::now();
  SacConfig sc;
  sc.obs_dim = 2;
  sc.hidden_width = 32;
  sc.hidden_layers = 2;
  sc.learning_rate = 1e-3;
  sc.target_entropy = -6.0;
  Rng rng = make_rng(1, 9);
  SacAgent<double> agent(sc, rng);
  const Eigen::Vector2d best(0.4, -0.3);
  const int b = 64;
  TransitionBatch<double> batch;
  batch.obs = Eigen::MatrixXd::Ones(2, b);
  batch.next_obs = batch.obs;
  batch.critic_obs = Eigen::MatrixXd::Zero(3, b);
  batch.next_critic_obs = batch.critic_obs;
  batch.dones = Eigen::MatrixXd::Ones(1, b);
  batch.rewards.resize(1, b);
  for (int it = 0; it < 5000; ++it) {
    batch.actions = agent.sample_action(batch.obs, rng);
    for (int j = 0; j < b; ++j) batch.rewards(0, j) = -(batch.actions.col(j) - best).squaredNorm();
    agent.update(batch, rng);
  }
  const Eigen::Vector2d a = agent.deterministic_action(Eigen::MatrixXd::Ones(2, 1)).col(0);
  const double bandit = (a - best).cwiseAbs().maxCoeff();

  double first = 0.0, last = 0.0;
  int nf = 0, nl = 0;
  for (const auto& p : trained.curve) {
    if (p.step < total_steps / 10) first += p.mean_return, ++nf;
    if (p.step >= total_steps - total_steps / 10) last += p.mean_return, ++nl;
  }
  first /= std::max(nf, 1);
  last /= std::max(nl, 1);
  // a non-positive start counts as improved by any positive end
  const bool improved = nf > 0 && nl > 0 && (first > 0.0 ? last >= tol::return_ratio * first : last > 0.0);
  const long steps = trained.curve.empty() ? 0 : trained.curve.back().step;
  report(9, bandit < tol::bandit_err && improved && steps >= 200'000,
         fmt::format("SAC sanity: bandit error {:.3f} (< {:.2f}); {} training steps, eval return first 10% {:.1f}, "
                     "last 10% {:.1f}, ratio {:.2f} (>= {:.0f}){}",
                     bandit, tol::bandit_err, steps, first, last, first != 0.0 ? last / first : NAN,
                     tol::return_ratio, trained.cached ? " [cached policy]" : ""),
         since(t0) + trained.seconds);
}

// --- 10 ------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism(const std::string& cli, const Trained& trained, const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(work);
  const std::vector<std::pair<std::string, std::string>> jobs{
      {"validate-gdop", "validate-gdop --layout is --trials 200 --workers 4 --seed 5 --out {}"},
      {"benchmark", "benchmark --realizations 3 --seed 5 --policy " + trained.checkpoint + " --out {}"},
      {"episode-sac", "episode --policy " + trained.checkpoint + " --scenario circle --layout is --seed 5 --trace {}"},
      {"episode-static", "episode --policy static --scenario line --distance 1.5 --seed 5 --trace {}"}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, args] : jobs) {
    std::string out[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path file = work / fmt::format("{}_{}.csv", name, rep);
      fs::remove(file);
      const std::string cmd = fmt::format("\"{}\" {} > /dev/null 2>&1", cli, fmt::format(fmt::runtime(args), file.string()));
      if (std::system(cmd.c_str()) != 0) ok = false;
      out[rep] = slurp(file);
    }
    const bool same = !out[0].empty() && out[0] == out[1];
    ok = ok && same;
    detail += fmt::format(" {}={}", name, same ? "identical" : "DIFFERENT");
  }
  report(10, ok, "determinism:" + detail, since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  std::string cli, cache_dir = "acceptance_cache";
  unsigned workers = default_workers();
  long steps = 200'000;
  int width = 64;
  app.add_option("--cli", cli, "Path to the auwb executable")->required();
  app.add_option("--cache-dir", cache_dir, "Where the trained policy and its curve are kept");
  app.add_option("--workers", workers, "Worker threads");
  app.add_option("--train-steps", steps, "Desk-scale training steps");
  app.add_option("--hidden-width", width, "Hidden width of the desk-scale networks");
  CLI11_PARSE(app, argc, argv);

  AppConfig cfg;
  cfg.workers = workers;
  cfg.train.total_steps = steps;
  cfg.train.hidden_width = width;
  cfg.train.eval_workers = workers;
  const BenchContext ctx = cfg.bench_context();

  gdop_validation(workers);
  configuration_facts();
  loss_landscape();
  estimator_properties();
  static_baseline(ctx);
  const Trained trained = desk_training(cfg, cache_dir);
  active_improvement(ctx, trained);
  position_independence(ctx, trained);
  gradient_checks();
  sac_sanity(trained, steps);
  determinism(cli, trained, fs::path(cache_dir) / "determinism");

  fmt::print("{} of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
