#include "activeuwb/sensing.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "activeuwb/errors.hpp"

namespace activeuwb {

void RangingModel::validate() const {
  if (!(sigma_range >= 0.0) || !std::isfinite(sigma_range)) throw std::invalid_argument("sigma_range must be >= 0");
  if (!(k1 < 0.0)) throw std::invalid_argument("k1 must be negative");
  if (!(min_valid_range >= 0.0)) throw std::invalid_argument("min_valid_range must be >= 0");
}

double expected_short_range_error(double distance, const RangingModel& model) {
  return model.c1 * std::exp(model.k1 * distance);
}

RangeTriple true_ranges(const RelPosition& tag, const AnchorLayout& layout) {
  RangeTriple d;
  for (int i = 0; i < 3; ++i) {
    d[i] = (tag - layout[i]).norm();
    if (!(d[i] > kCoincidenceEps)) throw DegenerateGeometry("tag coincides with anchor " + std::to_string(i + 1));
  }
  return d;
}

RangeTriple measure_ranges(const RelPosition& tag, const AnchorLayout& layout, const RangingModel& model, Rng& rng,
                           int* clamped) {
  RangeTriple d = true_ranges(tag, layout);
  if (model.sigma_range > 0.0) {
    std::normal_distribution<double> noise(0.0, model.sigma_range);
    for (int i = 0; i < 3; ++i) d[i] += noise(rng);
  }
  for (int i = 0; i < 3; ++i) {
    if (d[i] < model.min_valid_range) {
      d[i] = model.min_valid_range;
      if (clamped) ++*clamped;
    }
  }
  return d;
}

}  // namespace activeuwb
