#pragma once

// Synthetic firm panels from a log-linear Cobb-Douglas model with latent TFP
// drawn under a shift / dilation / left-truncation relation between areas.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpjks/panel.hpp"
#include "hpjks/rng.hpp"

namespace hpjks {

enum class LatentFamily { kNormal, kUniform, kLogNormal, kStudentT };

/// Base (BMD) law of latent TFP.
///
/// Parameters by family:
///   Normal     a = mean, b = standard deviation
///   Uniform    a = lower bound, b = upper bound
///   LogNormal  a = mean of log, b = sd of log
///   StudentT   a = location, b = scale, df = degrees of freedom (> 2)
struct LatentDistSpec {
  LatentFamily family = LatentFamily::kNormal;
  double a = 0.0;
  double b = 1.0;
  double df = 5.0;

  static LatentDistSpec normal(double mean = 0.0, double sd = 1.0) { return {LatentFamily::kNormal, mean, sd, 0.0}; }
  static LatentDistSpec uniform(double lo = 0.0, double hi = 1.0) { return {LatentFamily::kUniform, lo, hi, 0.0}; }
  static LatentDistSpec lognormal(double meanlog = 0.0, double sdlog = 1.0) {
    return {LatentFamily::kLogNormal, meanlog, sdlog, 0.0};
  }
  static LatentDistSpec student_t(double df, double location = 0.0, double scale = 1.0) {
    return {LatentFamily::kStudentT, location, scale, df};
  }

  /// Throws std::invalid_argument for non-positive scale, empty support or df <= 2.
  void validate() const;
  double cdf(double x) const;
  /// p in (0, 1).
  double quantile(double p) const;
  double mean() const;
  double variance() const;

  bool operator==(const LatentDistSpec&) const = default;
};

std::string to_string(LatentFamily family);
LatentFamily parse_latent_family(const std::string& name);

/// max{0, (F((theta - mu) / sigma) - xi) / (1 - xi)} for any base CDF F.
/// Throws std::invalid_argument unless sigma > 0 and 0 <= xi < 1.
template <typename BaseCdf>
double cdgpr_cdf_transform(const BaseCdf& base_cdf_at, double theta, double mu, double sigma, double xi);

double cdgpr_cdf_transform(const LatentDistSpec& base, double theta, double mu, double sigma, double xi);

/// One draw by inverse CDF on a uniform rescaled to [xi, 1):
/// theta = mu + sigma * Q(xi + (1 - xi) * u).
double latent_from_uniform(const LatentDistSpec& base, double mu, double sigma, double xi, double u);

std::vector<double> sample_latent_tfp(const LatentDistSpec& base, double mu, double sigma, double xi,
                                      std::size_t n, Stream& stream);

enum class NoiseLaw { kNormal, kUniform, kStudentT };
std::string to_string(NoiseLaw law);
NoiseLaw parse_noise_law(const std::string& name);

/// Law of the transitory term U_it, scaled so that its standard deviation is
/// `sd`. ar1 != 0 makes the series a stationary AR(1) with that coefficient.
struct NoiseSpec {
  NoiseLaw law = NoiseLaw::kNormal;
  double sd = 1.0;
  double df = 5.0;
  double ar1 = 0.0;

  void validate() const;
  /// Fills `out` with one firm's noise series.
  void draw(Stream& stream, std::span<double> out) const;

  bool operator==(const NoiseSpec&) const = default;
};

/// log K and log L are Normal; their standardized innovations load on the
/// firm's latent rank score with weight theta_correlation.
struct InputProcess {
  double log_k_mean = 2.0;
  double log_k_sd = 1.0;
  double log_l_mean = 1.0;
  double log_l_sd = 1.0;
  double theta_correlation = 0.0;

  bool operator==(const InputProcess&) const = default;
};

struct DgpConfig {
  std::string sector = "S1";
  int first_year = 2000;
  // Year intercepts. Empty means the default trend 0.01 * t for t = 1..T.
  std::map<int, double> beta0_by_year;
  double beta1 = 0.3;
  double beta2 = 0.6;
  LatentDistSpec latent;
  // Optional different base law for AMD firms, for shape-change alternatives.
  std::optional<LatentDistSpec> amd_latent;
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
  NoiseSpec noise;
  std::size_t n_amd = 100;
  std::size_t n_bmd = 100;
  int tenure = 15;
  InputProcess inputs;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  double beta0(int year) const;
  int last_year() const noexcept { return first_year + tenure - 1; }

  bool operator==(const DgpConfig&) const = default;
};

struct FirmTruth {
  std::string firm_id;
  Area area = Area::kBmd;
  double theta = 0.0;
};

struct GroundTruth {
  std::vector<FirmTruth> firms;
  // U_it for every observation, aligned with the generated dataset.
  std::vector<double> noise;
  DgpConfig config;
};

struct SimulatedPanel {
  PanelDataset dataset;
  GroundTruth truth;
};

/// Deterministic given config.seed: each firm draws from its own sub-stream,
/// so the result is identical for any thread count.
SimulatedPanel generate_panel(const DgpConfig& config, unsigned threads = 1);

/// Sidecar with columns firm_id, theta, area.
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth);

// ---------------------------------------------------------------------------

template <typename BaseCdf>
double cdgpr_cdf_transform(const BaseCdf& base_cdf_at, double theta, double mu, double sigma, double xi) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in [0, 1)");
  const double f = base_cdf_at((theta - mu) / sigma);
  const double v = (f - xi) / (1.0 - xi);
  return v > 0.0 ? v : 0.0;
}

}  // namespace hpjks
