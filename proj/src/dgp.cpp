#include "hpjks/dgp.hpp"

#include <algorithm>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "csv_util.hpp"
#include "hpjks/parallel.hpp"
#include "io_util.hpp"

namespace hpjks {

namespace bm = boost::math;

void LatentDistSpec::validate() const {
  switch (family) {
    case LatentFamily::kNormal:
    case LatentFamily::kLogNormal:
      if (!(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("latent law needs a finite location and a positive scale");
      }
      break;
    case LatentFamily::kUniform:
      if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("uniform latent law needs lower < upper");
      }
      break;
    case LatentFamily::kStudentT:
      if (!(b > 0.0) || !std::isfinite(a)) throw std::invalid_argument("Student t latent law needs a positive scale");
      if (!(df > 2.0)) throw std::invalid_argument("Student t latent law needs df > 2 so the variance exists");
      break;
  }
}

double LatentDistSpec::cdf(double x) const {
  switch (family) {
    case LatentFamily::kNormal:
      return bm::cdf(bm::normal_distribution<>(a, b), x);
    case LatentFamily::kUniform:
      return std::clamp((x - a) / (b - a), 0.0, 1.0);
    case LatentFamily::kLogNormal:
      return x <= 0.0 ? 0.0 : bm::cdf(bm::lognormal_distribution<>(a, b), x);
    case LatentFamily::kStudentT:
      return bm::cdf(bm::students_t_distribution<>(df), (x - a) / b);
  }
  return 0.0;
}

double LatentDistSpec::quantile(double p) const {
  switch (family) {
    case LatentFamily::kNormal:
      return bm::quantile(bm::normal_distribution<>(a, b), p);
    case LatentFamily::kUniform:
      return a + (b - a) * p;
    case LatentFamily::kLogNormal:
      return bm::quantile(bm::lognormal_distribution<>(a, b), p);
    case LatentFamily::kStudentT:
      return a + b * bm::quantile(bm::students_t_distribution<>(df), p);
  }
  return 0.0;
}

double LatentDistSpec::mean() const {
  switch (family) {
    case LatentFamily::kNormal: return a;
    case LatentFamily::kUniform: return 0.5 * (a + b);
    case LatentFamily::kLogNormal: return std::exp(a + 0.5 * b * b);
    case LatentFamily::kStudentT: return a;
  }
  return 0.0;
}

double LatentDistSpec::variance() const {
  switch (family) {
    case LatentFamily::kNormal: return b * b;
    case LatentFamily::kUniform: return (b - a) * (b - a) / 12.0;
    case LatentFamily::kLogNormal: return std::expm1(b * b) * std::exp(2.0 * a + b * b);
    case LatentFamily::kStudentT: return b * b * df / (df - 2.0);
  }
  return 0.0;
}

std::string to_string(LatentFamily family) {
  switch (family) {
    case LatentFamily::kNormal: return "normal";
    case LatentFamily::kUniform: return "uniform";
    case LatentFamily::kLogNormal: return "lognormal";
    case LatentFamily::kStudentT: return "student_t";
  }
  return "normal";
}

LatentFamily parse_latent_family(const std::string& name) {
  if (name == "normal") return LatentFamily::kNormal;
  if (name == "uniform") return LatentFamily::kUniform;
  if (name == "lognormal") return LatentFamily::kLogNormal;
  if (name == "student_t") return LatentFamily::kStudentT;
  throw std::invalid_argument("unknown latent family: " + name);
}

double cdgpr_cdf_transform(const LatentDistSpec& base, double theta, double mu, double sigma, double xi) {
  return cdgpr_cdf_transform([&base](double x) { return base.cdf(x); }, theta, mu, sigma, xi);
}

double latent_from_uniform(const LatentDistSpec& base, double mu, double sigma, double xi, double u) {
  // Keep the rescaled probability strictly inside (0, 1).
  constexpr double kTop = 1.0 - 0x1.0p-53;
  const double p = std::min(xi + (1.0 - xi) * u, kTop);
  return mu + sigma * base.quantile(p);
}

std::vector<double> sample_latent_tfp(const LatentDistSpec& base, double mu, double sigma, double xi,
                                      std::size_t n, Stream& stream) {
  base.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in [0, 1)");
  std::vector<double> out(n);
  for (auto& x : out) x = latent_from_uniform(base, mu, sigma, xi, stream.open_uniform());
  return out;
}

std::string to_string(NoiseLaw law) {
  switch (law) {
    case NoiseLaw::kNormal: return "normal";
    case NoiseLaw::kUniform: return "uniform";
    case NoiseLaw::kStudentT: return "student_t";
  }
  return "normal";
}

NoiseLaw parse_noise_law(const std::string& name) {
  if (name == "normal") return NoiseLaw::kNormal;
  if (name == "uniform") return NoiseLaw::kUniform;
  if (name == "student_t") return NoiseLaw::kStudentT;
  throw std::invalid_argument("unknown noise law: " + name);
}

void NoiseSpec::validate() const {
  if (!(sd >= 0.0) || !std::isfinite(sd)) throw std::invalid_argument("noise sd must be nonnegative");
  if (law == NoiseLaw::kStudentT && !(df > 2.0)) throw std::invalid_argument("Student t noise needs df > 2");
  if (!(ar1 > -1.0 && ar1 < 1.0)) throw std::invalid_argument("AR(1) noise coefficient must lie in (-1, 1)");
}

void NoiseSpec::draw(Stream& stream, std::span<double> out) const {
  switch (law) {
    case NoiseLaw::kNormal: {
      std::normal_distribution<double> nd(0.0, 1.0);
      for (auto& e : out) e = nd(stream);
      break;
    }
    case NoiseLaw::kUniform: {
      const double half_width = std::sqrt(3.0);
      for (auto& e : out) e = half_width * (2.0 * stream.open_uniform() - 1.0);
      break;
    }
    case NoiseLaw::kStudentT: {
      std::student_t_distribution<double> td(df);
      const double unit = std::sqrt((df - 2.0) / df);
      for (auto& e : out) e = unit * td(stream);
      break;
    }
  }
  if (ar1 != 0.0) {
    const double innovation = std::sqrt(1.0 - ar1 * ar1);
    for (std::size_t t = 1; t < out.size(); ++t) out[t] = ar1 * out[t - 1] + innovation * out[t];
  }
  for (auto& e : out) e *= sd;
}

void DgpConfig::validate() const {
  latent.validate();
  if (amd_latent) amd_latent->validate();
  noise.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in [0, 1)");
  if (tenure < 2) throw std::invalid_argument("tenure must be at least 2");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("factor shares beta1, beta2 must lie in [0, 1)");
  }
  if (!(inputs.log_k_sd >= 0.0) || !(inputs.log_l_sd >= 0.0)) {
    throw std::invalid_argument("input process standard deviations must be nonnegative");
  }
  if (!(std::abs(inputs.theta_correlation) <= 1.0)) {
    throw std::invalid_argument("input-productivity correlation must lie in [-1, 1]");
  }
  if (!beta0_by_year.empty()) {
    for (int y = first_year; y <= last_year(); ++y) {
      if (!beta0_by_year.count(y)) throw std::invalid_argument("beta0_by_year lacks year " + std::to_string(y));
    }
  }
}

double DgpConfig::beta0(int year) const {
  if (beta0_by_year.empty()) return 0.01 * static_cast<double>(year - first_year + 1);
  return beta0_by_year.at(year);
}

namespace {

struct FirmDraw {
  FirmTruth truth;
  std::vector<PanelObservation> observations;
  std::vector<double> noise;
};

std::string firm_name(char prefix, std::size_t index, std::size_t count) {
  int width = 1;
  for (std::size_t c = count; c >= 10; c /= 10) ++width;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, index + 1);
  return buf;
}

FirmDraw draw_firm(const DgpConfig& c, Area area, std::size_t index) {
  const std::uint64_t area_key = area == Area::kAmd ? 1 : 2;
  Stream stream(c.seed, {area_key, index});

  FirmDraw f;
  const std::size_t count = area == Area::kAmd ? c.n_amd : c.n_bmd;
  f.truth.firm_id = firm_name(area == Area::kAmd ? 'A' : 'B', index, count);
  f.truth.area = area;
  const double u = stream.open_uniform();
  if (area == Area::kAmd) {
    f.truth.theta = latent_from_uniform(c.amd_latent.value_or(c.latent), c.mu, c.sigma, c.xi, u);
  } else {
    f.truth.theta = latent_from_uniform(c.latent, 0.0, 1.0, 0.0, u);
  }

  const double rho = c.inputs.theta_correlation;
  const double rank_score = rho != 0.0 ? bm::quantile(bm::normal_distribution<>(), u) : 0.0;
  const double idio = std::sqrt(1.0 - rho * rho);

  const auto t_count = static_cast<std::size_t>(c.tenure);
  std::vector<double> log_k(t_count), log_l(t_count);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t t = 0; t < t_count; ++t) {
    log_k[t] = c.inputs.log_k_mean + c.inputs.log_k_sd * (rho * rank_score + idio * nd(stream));
    log_l[t] = c.inputs.log_l_mean + c.inputs.log_l_sd * (rho * rank_score + idio * nd(stream));
  }
  f.noise.resize(t_count);
  c.noise.draw(stream, f.noise);

  f.observations.reserve(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    const int year = c.first_year + static_cast<int>(t);
    const double log_v = f.truth.theta + c.beta1 * log_k[t] + c.beta2 * log_l[t] + f.noise[t] + c.beta0(year);
    PanelObservation o;
    o.firm_id = f.truth.firm_id;
    o.year = year;
    o.sector = c.sector;
    o.area = area;
    o.value_added = std::exp(log_v);
    o.capital = std::exp(log_k[t]);
    o.labor = std::exp(log_l[t]);
    f.observations.push_back(std::move(o));
  }
  return f;
}

}  // namespace

SimulatedPanel generate_panel(const DgpConfig& config, unsigned threads) {
  config.validate();
  const std::size_t total = config.n_amd + config.n_bmd;
  std::vector<FirmDraw> draws(total);
  parallel_for(total, threads, [&](std::size_t i) {
    draws[i] = i < config.n_amd ? draw_firm(config, Area::kAmd, i)
                                : draw_firm(config, Area::kBmd, i - config.n_amd);
  });

  SimulatedPanel out;
  out.truth.config = config;
  out.truth.firms.reserve(total);
  out.dataset.observations.reserve(total * static_cast<std::size_t>(config.tenure));
  out.truth.noise.reserve(out.dataset.observations.capacity());
  for (auto& f : draws) {
    out.truth.firms.push_back(std::move(f.truth));
    for (auto& o : f.observations) out.dataset.observations.push_back(std::move(o));
    out.truth.noise.insert(out.truth.noise.end(), f.noise.begin(), f.noise.end());
  }
  return out;
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth) {
  std::ostringstream out;
  out << "firm_id,theta,area\n";
  for (const auto& f : truth.firms) {
    out << csv::quote(f.firm_id) << ',' << csv::format_double(f.theta) << ',' << to_string(f.area) << '\n';
  }
  io::write_file_atomic(path, out.str());
}

}  // namespace hpjks
