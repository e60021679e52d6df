#pragma once

// Two-sample Kolmogorov-Smirnov comparison of mean-variance standardized,
// jackknife-debiased CDFs, with a firm-level bootstrap for the p-value.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpjks/hpj.hpp"

namespace hpjks {

struct CellSummary {
  std::string sector;
  Area area = Area::kBmd;
  std::size_t n_firms = 0;
  std::size_t min_tenure = 0;
  DebiasedScalar mean;
  DebiasedScalar variance;
  double sd = 0.0;  // sqrt of the debiased variance
  DebiasedCdf cdf;

  /// Debiased CDF on the standardized axis: F(mean + sd * z).
  double standardized_cdf(double z) const { return cdf(mean.value + sd * z); }
};

/// Throws std::invalid_argument for fewer than two firms and
/// DegenerateVarianceError when the debiased variance is not positive.
CellSummary summarize_cell(std::span<const TripleEstimate> cell);

/// sup over z of |F_amd(mu_amd + sd_amd z) - F_bmd(mu_bmd + sd_bmd z)|.
///
/// Both curves are finite combinations of step functions, so the supremum is
/// attained on the union of standardized jump points; the sweep accumulates
/// integer jump weights over the common denominator 2 * n_amd * n_bmd, which
/// makes the result exact up to one final division.
double ks_statistic(const CellSummary& amd, const CellSummary& bmd);

/// The standardized difference F_amd(mu + sd z) - F_bmd(mu + sd z) at one
/// point, evaluated directly (for plots and checks).
double standardized_difference(const CellSummary& amd, const CellSummary& bmd, double z);

/// max{n_amd, n_bmd} / t_min^4. Throws std::invalid_argument if t_min < 2.
double validity_ratio(std::size_t n_amd, std::size_t n_bmd, std::size_t t_min);

struct BootstrapOptions {
  std::size_t replications = 999;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double validity_threshold = 1.0;
};

struct TestResult {
  std::string sector;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_bootstrap = 0;      // requested draws
  std::size_t completed_draws = 0;  // draws with a usable variance in both areas
  std::size_t degenerate_draws = 0;
  std::size_t exceedances = 0;      // completed draws with T* >= T
  std::size_t n_amd = 0;
  std::size_t n_bmd = 0;
  std::size_t t_min = 0;
  double validity_ratio = 0.0;
  std::vector<double> bootstrap_statistics;  // completed draws, in draw order
  std::vector<std::string> warnings;
};

/// Firm-level bootstrap. Each draw resamples firms with replacement within
/// each area, recomputes all debiased quantities, and takes the recentered
/// statistic sup |D*_b - D| where D is the observed standardized difference
/// function. p = (1 + #{T*_b >= T}) / (completed + 1).
///
/// Draw b uses the stream derive_seed(seed, {b}); results do not depend on
/// options.threads. Throws like summarize_cell for unusable original cells.
TestResult bootstrap_test(std::span<const TripleEstimate> amd, std::span<const TripleEstimate> bmd,
                          const BootstrapOptions& options);

}  // namespace hpjks
