#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "activeuwb/episode.hpp"
#include "activeuwb/policy.hpp"
#include "activeuwb/sac.hpp"

namespace activeuwb {

// ---------------------------------------------------------------------------
// MLE

/// Mean over steps of ||estimate - truth||, in centimeters.
double compute_mle(const EpisodeTrace& trace);

struct MleReport {
  double mu_cm = 0.0;     // mean of the per-run MLE
  double sigma_cm = 0.0;  // standard deviation of the per-step error, pooled over runs
  std::vector<double> per_run_cm;
};

MleReport summarize_runs(const std::vector<EpisodeTrace>& traces);

// ---------------------------------------------------------------------------
// Scenarios

enum class Method { SUL, AUL, HEU };
enum class TagMode { front, side, behind, line, circle, square };

const char* to_string(Method m);
const char* to_string(TagMode m);
Method parse_method(const std::string& s);
TagMode parse_mode(const std::string& s);

struct Scenario {
  Method method = Method::SUL;
  std::string layout = "EQ";  // EQ | IS
  double init_distance = 0.70;  // m
  TagMode mode = TagMode::front;
  int realizations = 1000;

  int init_cm() const;
  std::string label() const;  // e.g. "SUL-EQ 70cm front"
};

/// Tag speeds and shapes of the dynamic benchmark paths.
struct PathParams {
  double line_length = 2.0;           // m, radially away from the AnchorBot
  double line_speed = 2.0 / 30.0;     // m/s, covers the line in one episode
  double circle_speed = 0.05;         // m/s
  double square_side = 1.0;           // m
  double square_speed = 0.05;         // m/s
};

/// Tag path of a scenario; the AnchorBot starts at the origin facing +x.
TagPath make_tag_path(const Scenario& sc, const PathParams& params);

// ---------------------------------------------------------------------------
// Benchmark

struct BenchConfig {
  std::vector<std::string> methods{"SUL-EQ", "SUL-IS", "AUL-IS"};
  std::vector<double> init_distances{0.70, 0.85, 1.00, 1.50, 2.00};
  std::vector<std::string> modes{"front", "side", "behind", "line", "circle", "square"};
  int realizations = 1000;

  /// Cartesian product methods x distances x modes.
  std::vector<Scenario> scenarios() const;
};

/// Everything a benchmark needs besides the scenario list.
struct BenchContext {
  SimConfig sim{};
  double alpha = 10.0;
  AnnulusDomain domain{};
  double eq_side = 0.35;
  PathParams paths{};
  GeometricGains heuristic_gains{};
  std::map<std::string, std::shared_ptr<const SacPolicy>> learned;  // layout -> policy, for AUL rows
  unsigned workers = 1;

  AnchorLayout layout(const std::string& name) const;
  std::shared_ptr<const LossModel> loss_model(const std::string& layout) const;

 private:
  mutable std::map<std::string, std::shared_ptr<const LossModel>> cache_;
};

/// Builds the policy that drives `sc`. Throws std::invalid_argument when an
/// AUL row has no learned policy for its layout.
std::unique_ptr<Policy> make_policy(const Scenario& sc, const BenchContext& ctx);

/// Seed of realization `r` in cell `sc`; depends only on the cell identity,
/// so adding or reordering cells leaves other cells unchanged.
std::uint64_t realization_seed(const Scenario& sc, std::uint64_t master, int r);

/// Runs every realization of one cell.
std::vector<EpisodeTrace> run_cell(const Scenario& sc, const BenchContext& ctx, std::uint64_t seed);

struct BenchRow {
  Scenario scenario;
  MleReport report;
  std::uint64_t seed = 0;
  std::optional<std::string> error;  // set when the cell was quarantined
};

/// Cells run one after another; realizations inside a cell run in parallel.
/// A cell that throws is reported with its error and the run continues.
std::vector<BenchRow> run_benchmark(const std::vector<Scenario>& scenarios, const BenchContext& ctx,
                                    std::uint64_t seed, std::ostream* log = nullptr);

/// method,layout,init_cm,mode,mu_cm,sigma_cm,n_runs,seed
void write_benchmark_csv(std::ostream& out, const std::vector<BenchRow>& rows);

// ---------------------------------------------------------------------------
// Map exports

struct GridSpec {
  double x_min = -3.0, x_max = 3.0;
  double y_min = -3.0, y_max = 3.0;
  double resolution = 0.05;
  double r_min = 0.0;  // cells closer than this to the body origin are left empty
};

/// x_m,y_m,gdop on a rectangular grid; singular or on-anchor cells leave gdop empty.
void export_gdop_map(std::ostream& out, const AnchorLayout& layout, const GridSpec& grid);

/// x_m,y_m,gdop,loss,scaled_loss; cells outside the annulus or singular are empty.
void export_loss_map(std::ostream& out, const LossModel& model, const GridSpec& grid);

struct GdopSample {
  double angle_deg = 0.0;
  double radius_m = 0.0;
  double analytical = 0.0;
  double empirical = 0.0;
  bool singular = false;

  double relative_error() const;
};

/// Analytical vs Monte Carlo GDOP on circles around the body origin.
std::vector<GdopSample> validate_gdop(const AnchorLayout& layout, const std::vector<double>& radii,
                                      double angle_step_deg, int trials, double sigma, std::uint64_t seed,
                                      unsigned workers = 1);

/// angle_deg,radius_m,gdop_analytical,gdop_empirical
void write_gdop_validation_csv(std::ostream& out, const std::vector<GdopSample>& samples);

}  // namespace activeuwb
