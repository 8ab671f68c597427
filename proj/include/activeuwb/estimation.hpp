#pragma once

#include <cstddef>
#include <cstdint>

#include "activeuwb/geometry.hpp"
#include "activeuwb/sensing.hpp"

namespace activeuwb {

/// Levenberg-Marquardt settings for range-only trilateration.
struct SolverOptions {
  double lambda_init = 1e-3;
  double lambda_factor = 10.0;
  int max_iterations = 100;
  double gradient_tolerance = 1e-10;
  /// Stops (without claiming convergence) once an accepted step is shorter
  /// than step_tolerance * (1 + ||p||).
  double step_tolerance = 1e-14;
  /// When > 0 and the converged residual norm exceeds it, the solve is
  /// repeated from the point reflection of the iterate through the anchor
  /// centroid and the lower-residual solution is kept. Typically 6*sigma*sqrt(3).
  double mirror_residual_threshold = 0.0;
};

SolverOptions solver_options_for(const RangingModel& model);

struct Estimate {
  RelPosition position = RelPosition::Zero();
  double residual_norm = 0.0;  // m, ||r|| at the returned position
  double gradient_norm = 0.0;  // ||J^T r||
  int iterations = 0;
  bool converged = false;
};

/// Minimizes sum_i (||p - p_ai|| - d_i)^2 from `initial_guess`. Never throws
/// for inconsistent ranges; returns the best iterate with converged = false
/// when the iteration budget runs out. Throws DegenerateGeometry if the guess
/// or an iterate coincides with an anchor.
Estimate trilaterate(const RangeTriple& ranges, const AnchorLayout& layout, const RelPosition& initial_guess,
                     const SolverOptions& options = {});

struct EmpiricalGdop {
  double value = 0.0;
  std::size_t trials = 0;    // converged trials used
  std::size_t excluded = 0;  // non-converged trials dropped
};

/// Statistical GDOP: sqrt(mean ||b_j - mean(b)||^2) / sigma over n_trials NLLS
/// estimates from independently noised ranges, each warm-started at the true
/// tag. Trial j draws its noise from make_rng(seed, j), so the result is
/// independent of `workers`. Throws EstimationFailure when more than 10% of
/// trials do not converge.
EmpiricalGdop gdop_empirical(const RelPosition& tag, const AnchorLayout& layout, const RangingModel& model,
                             std::size_t n_trials, std::uint64_t seed, unsigned workers = 1);

}  // namespace activeuwb
