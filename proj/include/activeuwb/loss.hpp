#pragma once

#include "activeuwb/geometry.hpp"
#include "activeuwb/sensing.hpp"

namespace activeuwb {

struct LossConfig {
  double alpha = 10.0;
  AnchorLayout layout = AnchorLayout::isosceles();
  RangingModel model{};
};

/// Polar search domain for the loss extrema. Excludes the robot footprint
/// (r < r_inner).
struct AnnulusDomain {
  double r_inner = 0.35;         // m
  double r_outer = 3.0;          // m
  double radial_step = 0.01;     // m
  double angular_step_deg = 0.5; // deg

  bool contains(const Vec2& p, double slack = 1e-12) const {
    const double r = p.norm();
    return r >= r_inner - slack && r <= r_outer + slack;
  }
};

struct LossExtrema {
  double l_min = 0.0;
  double l_max = 0.0;
  RelPosition argmin = RelPosition::Zero();
  RelPosition argmax = RelPosition::Zero();
  AnnulusDomain domain{};
};

/// l(p) = GDOP(p) + alpha * sum_i c1 * exp(k1 * ||p - p_ai||).
double localization_loss(const RelPosition& tag, const LossConfig& cfg);

/// (l(p) - l_min) / (l_max - l_min), not clamped. Throws DegenerateDomain if
/// l_max - l_min < 1e-12.
double scaled_loss(const RelPosition& tag, const LossConfig& cfg, const LossExtrema& extrema);

/// Exhaustive polar-grid search for the loss extrema over `domain`; the
/// minimizer is then polished by a Newton descent (along the boundary circle
/// when the grid minimum sits on it) until the gradient norm is below 1e-8.
/// Grid points where GDOP is singular are skipped.
LossExtrema find_loss_extrema(const LossConfig& cfg, const AnnulusDomain& domain = {});

/// Loss configuration bundled with its precomputed extrema; the reward uses
/// this so l_min / l_max are evaluated once per (layout, alpha).
class LossModel {
 public:
  LossModel(LossConfig cfg, const AnnulusDomain& domain = {});
  LossModel(LossConfig cfg, LossExtrema extrema) : cfg_(std::move(cfg)), extrema_(extrema) {}

  double loss(const RelPosition& p) const { return localization_loss(p, cfg_); }
  double scaled(const RelPosition& p) const { return scaled_loss(p, cfg_, extrema_); }

  const LossConfig& config() const { return cfg_; }
  const LossExtrema& extrema() const { return extrema_; }

 private:
  LossConfig cfg_;
  LossExtrema extrema_;
};

}  // namespace activeuwb
