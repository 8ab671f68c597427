#pragma once

#include <Eigen/Core>

#include "activeuwb/geometry.hpp"
#include "activeuwb/random.hpp"

namespace activeuwb {

/// UWB ranging model. sigma_range is the standard deviation of the additive
/// zero-mean Gaussian range noise; c1, k1 parameterize the short-range error
/// curve f_e(d) = c1 * exp(k1 * d) used by the localization loss.
struct RangingModel {
  double sigma_range = 0.05;    // m
  double c1 = 0.51;             // m
  double k1 = -3.152;           // 1/m
  double min_valid_range = 0.0; // m, floor applied to noisy draws

  /// Throws std::invalid_argument if an invariant is violated.
  void validate() const;
};

/// Measured distances [d1, d2, d3] in fixed anchor order.
using RangeTriple = Eigen::Vector3d;

double expected_short_range_error(double distance, const RangingModel& model);

/// Noise-free anchor-to-tag distances.
RangeTriple true_ranges(const RelPosition& tag, const AnchorLayout& layout);

/// d_i = max(floor, ||p_t - p_ai|| + eta_i), eta_i ~ N(0, sigma^2) drawn in
/// anchor order from `rng`. `clamped` (optional) is incremented once per
/// clamped component.
RangeTriple measure_ranges(const RelPosition& tag, const AnchorLayout& layout, const RangingModel& model,
                           Rng& rng, int* clamped = nullptr);

}  // namespace activeuwb
