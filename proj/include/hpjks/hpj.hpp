#pragma once

// Half-panel jackknife: combine a full-panel estimate with the two half-panel
// estimates as 2 * full - (half1 + half2) / 2.

#include <cstdint>
#include <span>
#include <vector>

#include "hpjks/prodfn.hpp"

namespace hpjks {

struct DebiasedScalar {
  double value = 0.0;
  double plugin = 0.0;
  double half1 = 0.0;
  double half2 = 0.0;
  // Set by debiased_variance when value <= 0 (or is not finite); such a
  // result must not be used as a scale.
  bool degenerate = false;
};

DebiasedScalar hpj_combine(double plugin, double half1, double half2) noexcept;

/// n - 1 (sample) or n (population) divisor for the three variances.
enum class VarianceDivisor { kSample, kPopulation };

/// Throws std::invalid_argument for an empty cell.
DebiasedScalar debiased_mean(std::span<const TripleEstimate> cell);
/// Same, with firm i counted multiplicity[i] times (a bootstrap resample
/// without materializing it).
DebiasedScalar debiased_mean(std::span<const TripleEstimate> cell, std::span<const std::uint32_t> multiplicity);

/// Throws std::invalid_argument when the cell has fewer than two firms. A
/// non-positive combined value is returned tagged `degenerate`.
DebiasedScalar debiased_variance(std::span<const TripleEstimate> cell,
                                 VarianceDivisor divisor = VarianceDivisor::kSample);
DebiasedScalar debiased_variance(std::span<const TripleEstimate> cell, std::span<const std::uint32_t> multiplicity,
                                 VarianceDivisor divisor = VarianceDivisor::kSample);

/// Debiased empirical CDF of one cell:
///   F(x) = 2 * Fhat(x) - (Fhat1(x) + Fhat2(x)) / 2
/// where Fhat, Fhat1 and Fhat2 are the right-continuous empirical CDFs of the
/// full-panel and half-panel TFP estimates. Values can leave [0, 1] and need
/// not be monotone; no clipping is applied.
class DebiasedCdf {
 public:
  DebiasedCdf() = default;
  DebiasedCdf(std::vector<double> full, std::vector<double> half1, std::vector<double> half2);

  double operator()(double x) const;

  /// Distinct values of all three samples, ascending.
  const std::vector<double>& jump_points() const noexcept { return jump_points_; }
  /// CDF value at each jump point.
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t n_firms() const noexcept { return full_.size(); }

  /// Sorted underlying samples.
  const std::vector<double>& full() const noexcept { return full_; }
  const std::vector<double>& half1() const noexcept { return half1_; }
  const std::vector<double>& half2() const noexcept { return half2_; }

 private:
  std::vector<double> full_, half1_, half2_;
  std::vector<double> jump_points_, values_;
};

/// Throws std::invalid_argument for an empty cell.
DebiasedCdf debiased_cdf(std::span<const TripleEstimate> cell);

/// For plotting only: clamps to [0, 1] and takes the running maximum so the
/// curve is a proper distribution function. Never feed this into a test.
std::vector<double> monotone_clip_for_plot(std::span<const double> values);

}  // namespace hpjks
