#include "activeuwb/loss.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "activeuwb/errors.hpp"

namespace activeuwb {

double localization_loss(const RelPosition& tag, const LossConfig& cfg) {
  double short_range = 0.0;
  for (const auto& a : cfg.layout.anchors()) {
    short_range += expected_short_range_error((tag - a).norm(), cfg.model);
  }
  return gdop_analytical(tag, cfg.layout) + cfg.alpha * short_range;
}

double scaled_loss(const RelPosition& tag, const LossConfig& cfg, const LossExtrema& extrema) {
  const double span = extrema.l_max - extrema.l_min;
  if (!(span >= 1e-12)) throw DegenerateDomain("loss extrema span is below 1e-12");
  return (localization_loss(tag, cfg) - extrema.l_min) / span;
}

namespace {

constexpr double kRefineTol = 1e-8;

Vec2 polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

// Newton iteration with central-difference derivatives and backtracking.
// Free minimization in the plane.
Vec2 refine_interior(const LossConfig& cfg, const AnnulusDomain& dom, Vec2 p) {
  const double hg = 1e-5;
  const double h = 1e-4;
  const auto f = [&](const Vec2& q) { return localization_loss(q, cfg); };
  for (int it = 0; it < 100; ++it) {
    const Vec2 gx(hg, 0.0), gy(0.0, hg);
    const Eigen::Vector2d g((f(p + gx) - f(p - gx)) / (2 * hg), (f(p + gy) - f(p - gy)) / (2 * hg));
    if (g.norm() < kRefineTol) break;
    const Vec2 ex(h, 0.0), ey(0.0, h);
    const double f0 = f(p);
    const double fxp = f(p + ex), fxm = f(p - ex), fyp = f(p + ey), fym = f(p - ey);
    Eigen::Matrix2d hess;
    hess(0, 0) = (fxp - 2 * f0 + fxm) / (h * h);
    hess(1, 1) = (fyp - 2 * f0 + fym) / (h * h);
    hess(0, 1) = hess(1, 0) = (f(p + ex + ey) - f(p + ex - ey) - f(p - ex + ey) + f(p - ex - ey)) / (4 * h * h);
    Eigen::Vector2d step = -g;
    if (hess.determinant() > 0 && hess.trace() > 0) step = -hess.ldlt().solve(g);
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Vec2 q = p + t * step;
      if (dom.contains(q) && f(q) <= f0) {
        moved = (q - p).norm() > 0.0;
        p = q;
        break;
      }
    }
    if (!moved) break;
  }
  return p;
}

// One-dimensional Newton search along the circle of radius r.
Vec2 refine_on_circle(const LossConfig& cfg, double r, double theta) {
  const double h = 1e-5;
  const auto f = [&](double t) { return localization_loss(polar(r, t), cfg); };
  for (int it = 0; it < 100; ++it) {
    const double f0 = f(theta), fp = f(theta + h), fm = f(theta - h);
    const double g = (fp - fm) / (2 * h);
    if (std::abs(g) / r < kRefineTol) break;
    const double curv = (fp - 2 * f0 + fm) / (h * h);
    double step = curv > 0 ? -g / curv : -g;
    bool moved = false;
    for (int k = 0; k < 40; ++k, step *= 0.5) {
      if (f(theta + step) <= f0) {
        theta += step;
        moved = step != 0.0;
        break;
      }
    }
    if (!moved) break;
  }
  return polar(r, theta);
}

}  // namespace

LossExtrema find_loss_extrema(const LossConfig& cfg, const AnnulusDomain& domain) {
  if (!(domain.r_inner > cfg.layout.max_radius())) {
    throw std::invalid_argument("find_loss_extrema: r_inner must exceed the anchor radius");
  }
  if (!(domain.r_outer > domain.r_inner) || !(domain.radial_step > 0) || !(domain.angular_step_deg > 0)) {
    throw std::invalid_argument("find_loss_extrema: invalid domain");
  }
  const int n_r = static_cast<int>(std::floor((domain.r_outer - domain.r_inner) / domain.radial_step + 1e-9)) + 1;
  const int n_t = static_cast<int>(std::lround(360.0 / domain.angular_step_deg));
  const double dtheta = 2.0 * std::numbers::pi / n_t;

  LossExtrema ex;
  ex.domain = domain;
  ex.l_min = std::numeric_limits<double>::infinity();
  ex.l_max = -std::numeric_limits<double>::infinity();
  int min_ir = 0;
  double min_theta = 0.0;
  for (int ir = 0; ir < n_r; ++ir) {
    const double r = std::min(domain.r_inner + ir * domain.radial_step, domain.r_outer);
    for (int it = 0; it < n_t; ++it) {
      const double theta = -std::numbers::pi + it * dtheta;
      const Vec2 p = polar(r, theta);
      double l;
      try {
        l = localization_loss(p, cfg);
      } catch (const SingularGeometry&) {
        continue;
      }
      if (l < ex.l_min) {
        ex.l_min = l;
        ex.argmin = p;
        min_ir = ir;
        min_theta = theta;
      }
      if (l > ex.l_max) {
        ex.l_max = l;
        ex.argmax = p;
      }
    }
  }

  const bool on_boundary = min_ir == 0 || min_ir == n_r - 1;
  Vec2 refined = on_boundary ? refine_on_circle(cfg, ex.argmin.norm(), min_theta)
                             : refine_interior(cfg, domain, ex.argmin);
  if (!on_boundary && (refined.norm() <= domain.r_inner || refined.norm() >= domain.r_outer)) {
    // Descent drifted onto the boundary; finish along that circle.
    const double r = refined.norm() <= domain.r_inner ? domain.r_inner : domain.r_outer;
    refined = refine_on_circle(cfg, r, bearing(refined));
  }
  const double l_refined = localization_loss(refined, cfg);
  if (l_refined <= ex.l_min) {
    ex.l_min = l_refined;
    ex.argmin = refined;
  }
  ex.l_min = localization_loss(ex.argmin, cfg);
  ex.l_max = localization_loss(ex.argmax, cfg);
  return ex;
}

LossModel::LossModel(LossConfig cfg, const AnnulusDomain& domain)
    : cfg_(std::move(cfg)), extrema_(find_loss_extrema(cfg_, domain)) {}

}  // namespace activeuwb
