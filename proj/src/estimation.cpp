#include "activeuwb/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "activeuwb/errors.hpp"
#include "activeuwb/parallel.hpp"

namespace activeuwb {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Linearization {
  Eigen::Vector3d residual;
  GeometryMatrix jacobian;
  Eigen::Matrix2d curvature;  // sum_i r_i * Hess(r_i)
  double cost;  // 0.5 * ||r||^2
};

Linearization linearize(const RelPosition& p, const RangeTriple& ranges, const AnchorLayout& layout) {
  Linearization lin;
  lin.curvature.setZero();
  for (int i = 0; i < 3; ++i) {
    const Vec2 diff = p - layout[i];
    const double dist = diff.norm();
    if (!(dist > kCoincidenceEps)) throw DegenerateGeometry("trilateration iterate coincides with an anchor");
    lin.residual[i] = dist - ranges[i];
    const Vec2 u = diff / dist;
    lin.jacobian.row(i) = u.transpose();
    lin.curvature += lin.residual[i] / dist * (Eigen::Matrix2d::Identity() - u * u.transpose());
  }
  lin.cost = 0.5 * lin.residual.squaredNorm();
  return lin;
}

Estimate levenberg_marquardt(const RangeTriple& ranges, const AnchorLayout& layout, const RelPosition& start,
                             const SolverOptions& opt) {
  RelPosition p = start;
  Linearization lin = linearize(p, ranges, layout);
  Eigen::Vector2d grad = lin.jacobian.transpose() * lin.residual;
  double lambda = opt.lambda_init;
  int it = 0;
  bool small_step = false;
  while (it < opt.max_iterations && !(grad.norm() < opt.gradient_tolerance) && !small_step) {
    ++it;
    // Gauss-Newton converges only linearly when the residual is not zero;
    // the full Hessian is used whenever it is positive definite.
    Eigen::Matrix2d model = lin.jacobian.transpose() * lin.jacobian;
    const Eigen::Matrix2d full = model + lin.curvature;
    if (full(0, 0) > 0.0 && full(0, 0) * full(1, 1) - full(0, 1) * full(1, 0) > 0.0) model = full;
    const double a = model(0, 0) + lambda, b = model(0, 1), c = model(1, 1) + lambda;
    const double det = a * c - b * b;
    const Eigen::Vector2d step(-(c * grad.x() - b * grad.y()) / det, -(a * grad.y() - b * grad.x()) / det);
    const RelPosition candidate = p + step;
    const Linearization trial = linearize(candidate, ranges, layout);
    const Eigen::Vector2d trial_grad = trial.jacobian.transpose() * trial.residual;
    // Close to a non-zero-residual minimum the cost change drops below its
    // rounding error (each residual carries ~eps * range); there the
    // gradient decides.
    const double cost_noise = 8.0 * kEps * lin.residual.cwiseAbs().dot(ranges.cwiseAbs() + lin.residual.cwiseAbs());
    const bool within_rounding = std::abs(trial.cost - lin.cost) <= cost_noise;
    if (trial.cost < lin.cost || (within_rounding && trial_grad.norm() < grad.norm())) {
      small_step = step.norm() < opt.step_tolerance * (1.0 + p.norm());
      p = candidate;
      lin = trial;
      grad = trial_grad;
      lambda = std::max(lambda / opt.lambda_factor, 1e-15);
    } else {
      lambda *= opt.lambda_factor;
      if (lambda > 1e16) break;  // no descent direction left at working precision
    }
  }
  Estimate est;
  est.position = p;
  est.residual_norm = lin.residual.norm();
  est.gradient_norm = grad.norm();
  est.iterations = it;
  est.converged = est.gradient_norm < opt.gradient_tolerance;
  return est;
}

}  // namespace

SolverOptions solver_options_for(const RangingModel& model) {
  SolverOptions opt;
  opt.mirror_residual_threshold = 6.0 * model.sigma_range * std::sqrt(3.0);
  return opt;
}

Estimate trilaterate(const RangeTriple& ranges, const AnchorLayout& layout, const RelPosition& initial_guess,
                     const SolverOptions& options) {
  Estimate best = levenberg_marquardt(ranges, layout, initial_guess, options);
  if (options.mirror_residual_threshold > 0.0 && best.residual_norm > options.mirror_residual_threshold) {
    const RelPosition mirrored = 2.0 * layout.centroid() - best.position;
    bool on_anchor = false;
    for (const auto& a : layout.anchors()) on_anchor = on_anchor || (mirrored - a).norm() <= kCoincidenceEps;
    if (!on_anchor) {
      Estimate alt = levenberg_marquardt(ranges, layout, mirrored, options);
      if (alt.residual_norm < best.residual_norm) {
        alt.iterations = std::min(options.max_iterations, alt.iterations);
        best = alt;
      }
    }
  }
  return best;
}

EmpiricalGdop gdop_empirical(const RelPosition& tag, const AnchorLayout& layout, const RangingModel& model,
                             std::size_t n_trials, std::uint64_t seed, unsigned workers) {
  if (n_trials < 2) throw std::invalid_argument("gdop_empirical: n_trials must be >= 2");
  if (!(model.sigma_range > 0.0)) throw std::invalid_argument("gdop_empirical: sigma_range must be > 0");

  const SolverOptions opt = solver_options_for(model);
  std::vector<Estimate> estimates(n_trials);
  parallel_for(n_trials, workers, [&](std::size_t j) {
    Rng rng = make_rng(seed, j);
    const RangeTriple d = measure_ranges(tag, layout, model, rng);
    estimates[j] = trilaterate(d, layout, tag, opt);
  });

  EmpiricalGdop out;
  Vec2 mean = Vec2::Zero();
  for (const auto& e : estimates) {
    if (e.converged) {
      mean += e.position;
      ++out.trials;
    } else {
      ++out.excluded;
    }
  }
  if (out.excluded * 10 > n_trials || out.trials < 2) {
    throw EstimationFailure("gdop_empirical: " + std::to_string(out.excluded) + " of " + std::to_string(n_trials) +
                            " trials did not converge");
  }
  mean /= static_cast<double>(out.trials);
  double sq = 0.0;
  for (const auto& e : estimates) {
    if (e.converged) sq += (e.position - mean).squaredNorm();
  }
  out.value = std::sqrt(sq / static_cast<double>(out.trials)) / model.sigma_range;
  return out;
}

}  // namespace activeuwb
