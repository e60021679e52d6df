#pragma once

// Monte Carlo experiments over synthetic panels: test size, power, and the
// bias order of plug-in versus jackknife-debiased estimators.

#include <cstdint>
#include <string>
#include <vector>

#include "hpjks/dgp.hpp"

namespace hpjks {

enum class ExperimentKind { kSize, kPower, kBiasOrder };
std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// How the bias check draws the per-firm noise averages. kAuto uses the exact
/// half-panel sufficient statistics when the noise is i.i.d. Normal and falls
/// back to per-period draws otherwise.
enum class NoiseSimulation { kAuto, kPerPeriod };

/// Cartesian grid; an empty axis means "use the base config's value".
struct ExperimentGrid {
  std::vector<double> xi;
  std::vector<std::size_t> firms;  // per area
  std::vector<int> tenure;
  std::vector<double> noise_sd;
  std::vector<double> mu;
  std::vector<double> sigma;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSize;
  DgpConfig base;
  ExperimentGrid grid;
  std::size_t replications = 500;
  std::size_t bootstrap = 199;
  double alpha = 0.05;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;
  // Bias check only: CDF evaluation points as probabilities of the base law.
  std::vector<double> eval_probabilities{0.25, 0.5, 0.75};
  NoiseSimulation noise_simulation = NoiseSimulation::kAuto;

  /// Checks the settings shared by all experiments. Throws std::invalid_argument.
  void validate() const;
};

struct GridPoint {
  double xi = 0.0;
  std::size_t firms = 0;
  int tenure = 0;
  double noise_sd = 0.0;
  double mu = 0.0;
  double sigma = 1.0;
};

/// Expands the grid in a fixed order (xi outermost, sigma innermost).
std::vector<GridPoint> expand_grid(const ExperimentConfig& config);

struct RejectionRow {
  GridPoint point;
  std::size_t replications = 0;  // completed replications
  std::size_t failed = 0;        // replications aborted by a degenerate original cell
  std::size_t rejections = 0;
  double rejection_rate = 0.0;
  double mc_se = 0.0;  // sqrt(rate (1 - rate) / replications)
  double mean_p_value = 0.0;
  // Average over replications of (estimate - variance of the true thetas in
  // the BMD cell), plug-in and debiased.
  double plugin_variance_bias = 0.0;
  double debiased_variance_bias = 0.0;
  std::size_t degenerate_draws = 0;
};

struct BiasRow {
  GridPoint point;
  double probability = 0.0;  // evaluation point as a base-law probability
  double eval_point = 0.0;   // base-law quantile at `probability`
  // Bias of the CDF estimators at eval_point, measured against the empirical
  // CDF of the true thetas in the same replication (which is unbiased for the
  // true CDF), with Monte Carlo standard errors.
  double plugin_bias = 0.0;
  double plugin_se = 0.0;
  double debiased_bias = 0.0;
  double debiased_se = 0.0;
  // Same biases measured against the true CDF value `probability`.
  double plugin_bias_raw = 0.0;
  double debiased_bias_raw = 0.0;
};

struct VarianceRow {
  GridPoint point;
  double true_variance = 0.0;
  double plugin_mean = 0.0;
  double plugin_se = 0.0;
  double debiased_mean = 0.0;
  double debiased_se = 0.0;
};

struct BiasRatio {
  int tenure = 0;
  int doubled = 0;
  double probability = 0.0;
  double plugin_ratio = 0.0;    // bias(T) / bias(2T)
  double debiased_ratio = 0.0;
};

struct MonteCarloSummary {
  ExperimentKind kind = ExperimentKind::kSize;
  std::vector<RejectionRow> rejection_rows;
  std::vector<BiasRow> bias_rows;
  std::vector<VarianceRow> variance_rows;
  std::vector<BiasRatio> ratios;
  std::vector<std::string> report;  // monotonicity and other notes
  double wall_clock_seconds = 0.0;
};

/// Requires xi = 0 and a common base law at every grid point.
MonteCarloSummary run_size_experiment(const ExperimentConfig& config);
/// Requires some xi > 0 or a different AMD base law.
MonteCarloSummary run_power_experiment(const ExperimentConfig& config);
/// Requires some T with 2T also on the grid. Simulates theta_i plus noise
/// directly (the production step is exact in expectation and left out).
MonteCarloSummary bias_order_check(const ExperimentConfig& config);
/// Dispatches on config.kind.
MonteCarloSummary run_experiment(const ExperimentConfig& config);

/// CSV (one row per grid point, or per grid point and evaluation point for
/// bias checks). Contains no timing, so it is reproducible byte for byte.
std::string summary_csv(const MonteCarloSummary& summary);
std::string summary_text(const MonteCarloSummary& summary);

}  // namespace hpjks
