#include "activeuwb/bench.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "activeuwb/errors.hpp"
#include "activeuwb/parallel.hpp"

namespace activeuwb {

double compute_mle(const EpisodeTrace& trace) {
  if (trace.steps.empty()) throw EmptyTrace("compute_mle: trace has no steps");
  double sum = 0.0;
  for (const auto& s : trace.steps) sum += (s.estimate - s.tag_rel).norm();
  return 100.0 * sum / static_cast<double>(trace.steps.size());
}

MleReport summarize_runs(const std::vector<EpisodeTrace>& traces) {
  if (traces.empty()) throw EmptyTrace("summarize_runs: no runs");
  MleReport rep;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& t : traces) {
    rep.per_run_cm.push_back(compute_mle(t));
    for (const auto& s : t.steps) {
      const double e = 100.0 * (s.estimate - s.tag_rel).norm();
      sum += e;
      sum_sq += e * e;
      ++n;
    }
  }
  double acc = 0.0;
  for (double m : rep.per_run_cm) acc += m;
  rep.mu_cm = acc / static_cast<double>(rep.per_run_cm.size());
  const double mean = sum / static_cast<double>(n);
  rep.sigma_cm = n > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / static_cast<double>(n - 1))) : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------

const char* to_string(Method m) {
  switch (m) {
    case Method::SUL: return "SUL";
    case Method::AUL: return "AUL";
    case Method::HEU: return "HEU";
  }
  return "?";
}

const char* to_string(TagMode m) {
  switch (m) {
    case TagMode::front: return "front";
    case TagMode::side: return "side";
    case TagMode::behind: return "behind";
    case TagMode::line: return "line";
    case TagMode::circle: return "circle";
    case TagMode::square: return "square";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "SUL") return Method::SUL;
  if (s == "AUL") return Method::AUL;
  if (s == "HEU" || s == "heuristic") return Method::HEU;
  throw std::invalid_argument("unknown method: " + s);
}

TagMode parse_mode(const std::string& s) {
  for (auto m : {TagMode::front, TagMode::side, TagMode::behind, TagMode::line, TagMode::circle, TagMode::square}) {
    if (s == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown tag mode: " + s);
}

int Scenario::init_cm() const { return static_cast<int>(std::lround(init_distance * 100.0)); }

std::string Scenario::label() const {
  return fmt::format("{}-{} {}cm {}", to_string(method), layout, init_cm(), to_string(mode));
}

TagPath make_tag_path(const Scenario& sc, const PathParams& pp) {
  const double d = sc.init_distance;
  switch (sc.mode) {
    case TagMode::front: return StaticPath{Vec2(d, 0.0)};
    case TagMode::side: return StaticPath{Vec2(0.0, d)};
    case TagMode::behind: return StaticPath{Vec2(-d, 0.0)};
    case TagMode::line: {
      LinePath p;
      p.start = Vec2(d, 0.0);
      p.direction = Vec2::UnitX();
      p.speed = pp.line_speed;
      p.length = pp.line_length;
      return p;
    }
    case TagMode::circle: {
      CirclePath p;
      p.center = Vec2::Zero();
      p.radius = d;
      p.start_angle = 0.0;
      p.speed = pp.circle_speed;
      return p;
    }
    case TagMode::square: {
      SquarePath p;
      p.start = Vec2(d, 0.0);
      p.first_leg = Vec2::UnitY();
      p.side = pp.square_side;
      p.speed = pp.square_speed;
      return p;
    }
  }
  throw std::logic_error("make_tag_path: bad mode");
}

std::vector<Scenario> BenchConfig::scenarios() const {
  std::vector<Scenario> out;
  for (const auto& m : methods) {
    const auto dash = m.find('-');
    Scenario sc;
    sc.method = parse_method(m.substr(0, dash));
    sc.layout = dash == std::string::npos ? "IS" : m.substr(dash + 1);
    if (sc.layout != "EQ" && sc.layout != "IS") throw std::invalid_argument("unknown layout in method: " + m);
    for (double d : init_distances) {
      for (const auto& mode : modes) {
        sc.init_distance = d;
        sc.mode = parse_mode(mode);
        sc.realizations = realizations;
        out.push_back(sc);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

AnchorLayout BenchContext::layout(const std::string& name) const {
  if (name == "EQ" || name == "eq") return AnchorLayout::equilateral(eq_side);
  if (name == "IS" || name == "is") return AnchorLayout::isosceles();
  throw std::invalid_argument("unknown layout: " + name);
}

std::shared_ptr<const LossModel> BenchContext::loss_model(const std::string& name) const {
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  LossConfig cfg;
  cfg.alpha = alpha;
  cfg.layout = layout(name);
  cfg.model = sim.ranging;
  auto model = std::make_shared<const LossModel>(cfg, domain);
  cache_.emplace(name, model);
  return model;
}

std::unique_ptr<Policy> make_policy(const Scenario& sc, const BenchContext& ctx) {
  switch (sc.method) {
    case Method::SUL: return std::make_unique<StaticPolicy>();
    case Method::HEU: {
      const auto model = ctx.loss_model(sc.layout);
      return std::make_unique<GeometricPolicy>(model->config().layout, model->extrema().argmin, ctx.heuristic_gains,
                                               ctx.sim.limits, solver_options_for(ctx.sim.ranging), ctx.sim.t_s);
    }
    case Method::AUL: {
      const auto it = ctx.learned.find(sc.layout);
      if (it == ctx.learned.end() || !it->second) {
        throw std::invalid_argument("no learned policy for layout " + sc.layout);
      }
      const auto expected = ctx.layout(sc.layout);
      for (int i = 0; i < 3; ++i) {
        if ((it->second->layout_anchors()[i] - expected[i]).norm() > 1e-9) {
          throw std::invalid_argument("learned policy was trained on a different anchor layout than " + sc.layout);
        }
      }
      if (it->second->history() != ctx.sim.history) {
        throw std::invalid_argument("learned policy history length does not match the simulation");
      }
      return it->second->clone();
    }
  }
  throw std::logic_error("make_policy: bad method");
}

namespace {
// FNV-1a, stable across platforms
std::uint64_t hash_label(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace

std::uint64_t realization_seed(const Scenario& sc, std::uint64_t master, int r) {
  return derive_seed(derive_seed(master, hash_label(sc.label())), static_cast<std::uint64_t>(r));
}

std::vector<EpisodeTrace> run_cell(const Scenario& sc, const BenchContext& ctx, std::uint64_t seed) {
  if (sc.realizations <= 0) throw std::invalid_argument("realizations must be positive");
  const auto loss = ctx.loss_model(sc.layout);
  const auto path = make_tag_path(sc, ctx.paths);
  const auto prototype = make_policy(sc, ctx);
  std::vector<EpisodeTrace> traces(static_cast<std::size_t>(sc.realizations));
  parallel_for(traces.size(), ctx.workers, [&](std::size_t r) {
    auto policy = prototype->clone();
    Environment env(ctx.sim, loss);
    traces[r] = run_episode(*policy, env, path, realization_seed(sc, seed, static_cast<int>(r)));
  });
  return traces;
}

std::vector<BenchRow> run_benchmark(const std::vector<Scenario>& scenarios, const BenchContext& ctx,
                                    std::uint64_t seed, std::ostream* log) {
  std::vector<BenchRow> rows;
  rows.reserve(scenarios.size());
  for (const auto& sc : scenarios) {
    BenchRow row;
    row.scenario = sc;
    row.seed = seed;
    try {
      row.report = summarize_runs(run_cell(sc, ctx, seed));
      if (log) fmt::print(*log, "{:<28} mu {:6.2f} cm  sigma {:6.2f} cm\n", sc.label(), row.report.mu_cm,
                          row.report.sigma_cm);
    } catch (const std::exception& e) {
      row.error = e.what();
      if (log) fmt::print(*log, "{:<28} FAILED: {}\n", sc.label(), e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "method,layout,init_cm,mode,mu_cm,sigma_cm,n_runs,seed\n";
  for (const auto& r : rows) {
    const auto& sc = r.scenario;
    if (r.error) {
      fmt::print(out, "{},{},{},{},,,0,{}\n", to_string(sc.method), sc.layout, sc.init_cm(), to_string(sc.mode),
                 r.seed);
    } else {
      fmt::print(out, "{},{},{},{},{:.4f},{:.4f},{},{}\n", to_string(sc.method), sc.layout, sc.init_cm(),
                 to_string(sc.mode), r.report.mu_cm, r.report.sigma_cm, r.report.per_run_cm.size(), r.seed);
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> axis(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("grid: bad range or resolution");
  const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> v;
  for (long i = 0; i <= n; ++i) v.push_back(lo + static_cast<double>(i) * step);
  return v;
}

std::optional<double> try_gdop(const Vec2& p, const AnchorLayout& layout) {
  try {
    return gdop_analytical(p, layout);
  } catch (const SingularGeometry&) {
  } catch (const DegenerateGeometry&) {
  }
  return std::nullopt;
}

}  // namespace

void export_gdop_map(std::ostream& out, const AnchorLayout& layout, const GridSpec& g) {
  const auto xs = axis(g.x_min, g.x_max, g.resolution);
  const auto ys = axis(g.y_min, g.y_max, g.resolution);
  out << "x_m,y_m,gdop\n";
  for (double y : ys) {
    for (double x : xs) {
      const auto v = std::hypot(x, y) < g.r_min ? std::nullopt : try_gdop(Vec2(x, y), layout);
      if (v) {
        fmt::print(out, "{:.4f},{:.4f},{:.6f}\n", x, y, *v);
      } else {
        fmt::print(out, "{:.4f},{:.4f},\n", x, y);
      }
    }
  }
}

void export_loss_map(std::ostream& out, const LossModel& model, const GridSpec& g) {
  const auto xs = axis(g.x_min, g.x_max, g.resolution);
  const auto ys = axis(g.y_min, g.y_max, g.resolution);
  const auto& domain = model.extrema().domain;
  out << "x_m,y_m,gdop,loss,scaled_loss\n";
  for (double y : ys) {
    for (double x : xs) {
      const Vec2 p(x, y);
      const auto v = try_gdop(p, model.config().layout);
      if (v && domain.contains(p)) {
        const double l = model.loss(p);
        fmt::print(out, "{:.4f},{:.4f},{:.6f},{:.6f},{:.6f}\n", x, y, *v, l, model.scaled(p));
      } else if (v) {
        fmt::print(out, "{:.4f},{:.4f},{:.6f},,\n", x, y, *v);
      } else {
        fmt::print(out, "{:.4f},{:.4f},,,\n", x, y);
      }
    }
  }
}

double GdopSample::relative_error() const {
  if (singular) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(empirical - analytical) / analytical;
}

std::vector<GdopSample> validate_gdop(const AnchorLayout& layout, const std::vector<double>& radii,
                                      double angle_step_deg, int trials, double sigma, std::uint64_t seed,
                                      unsigned workers) {
  if (!(angle_step_deg > 0.0)) throw std::invalid_argument("validate_gdop: angle step must be > 0");
  const int per_ring = static_cast<int>(std::lround(360.0 / angle_step_deg));
  std::vector<GdopSample> out;
  for (double r : radii) {
    for (int i = 0; i < per_ring; ++i) {
      GdopSample s;
      s.angle_deg = i * angle_step_deg;
      s.radius_m = r;
      out.push_back(s);
    }
  }
  RangingModel model;
  model.sigma_range = sigma;
  parallel_for(out.size(), workers, [&](std::size_t i) {
    auto& s = out[i];
    const double a = s.angle_deg * std::numbers::pi / 180.0;
    const Vec2 p(s.radius_m * std::cos(a), s.radius_m * std::sin(a));
    const auto ana = try_gdop(p, layout);
    if (!ana) {
      s.singular = true;
      return;
    }
    s.analytical = *ana;
    s.empirical = gdop_empirical(p, layout, model, trials, derive_seed(seed, i), 1).value;
  });
  return out;
}

void write_gdop_validation_csv(std::ostream& out, const std::vector<GdopSample>& samples) {
  out << "angle_deg,radius_m,gdop_analytical,gdop_empirical\n";
  for (const auto& s : samples) {
    if (s.singular) {
      fmt::print(out, "{:.1f},{:.2f},,\n", s.angle_deg, s.radius_m);
    } else {
      fmt::print(out, "{:.1f},{:.2f},{:.6f},{:.6f}\n", s.angle_deg, s.radius_m, s.analytical, s.empirical);
    }
  }
}

}  // namespace activeuwb
