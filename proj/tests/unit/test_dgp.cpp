#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "doctest.h"
#include "hpjks/dgp.hpp"

using namespace hpjks;

namespace {

double ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace

TEST_CASE("transform closed-form examples") {
  const auto u = LatentDistSpec::uniform(0.0, 1.0);
  CHECK(cdgpr_cdf_transform(u, 0.75, 0.0, 1.0, 0.5) == doctest::Approx(0.5));
  CHECK(cdgpr_cdf_transform(u, 0.2, 0.0, 1.0, 0.5) == 0.0);
  const auto n = LatentDistSpec::normal();
  for (double x : {-3.0, -0.7, 0.0, 0.4, 2.5}) CHECK(cdgpr_cdf_transform(n, x, 0.0, 1.0, 0.0) == n.cdf(x));
  // Callable form.
  CHECK(cdgpr_cdf_transform([](double x) { return std::clamp(x, 0.0, 1.0); }, 0.75, 0.0, 1.0, 0.5) ==
        doctest::Approx(0.5));
}

TEST_CASE("transform preconditions") {
  const auto n = LatentDistSpec::normal();
  CHECK_THROWS_AS(cdgpr_cdf_transform(n, 0.0, 0.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cdgpr_cdf_transform(n, 0.0, 0.0, -1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cdgpr_cdf_transform(n, 0.0, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cdgpr_cdf_transform(n, 0.0, 0.0, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("transform is monotone with limits 0 and 1") {
  for (const auto& base : {LatentDistSpec::normal(), LatentDistSpec::student_t(4.0), LatentDistSpec::lognormal()}) {
    double prev = 0.0;
    for (double x = -20.0; x <= 20.0; x += 0.01) {
      const double f = cdgpr_cdf_transform(base, x, 0.3, 1.7, 0.25);
      CHECK(f >= prev);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      prev = f;
    }
    CHECK(cdgpr_cdf_transform(base, -1e6, 0.3, 1.7, 0.25) == 0.0);
    CHECK(cdgpr_cdf_transform(base, 1e6, 0.3, 1.7, 0.25) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("sampler basics") {
  Stream s(42);
  CHECK(sample_latent_tfp(LatentDistSpec::normal(), 0, 1, 0, 0, s).empty());
  const auto draws = sample_latent_tfp(LatentDistSpec::normal(), 0.0, 1.0, 0.5, 10000, s);
  CHECK(*std::min_element(draws.begin(), draws.end()) >= 0.0);
  CHECK_THROWS_AS(sample_latent_tfp(LatentDistSpec::normal(), 0, 0, 0, 1, s), std::invalid_argument);
  CHECK_THROWS_AS(sample_latent_tfp(LatentDistSpec::student_t(2.0), 0, 1, 0, 1, s), std::invalid_argument);
}

TEST_CASE("sampler matches the closed form transform") {
  const std::vector<LatentDistSpec> bases{LatentDistSpec::normal(), LatentDistSpec::uniform(-1.0, 2.0),
                                          LatentDistSpec::lognormal(0.0, 0.5), LatentDistSpec::student_t(5.0)};
  std::uint64_t key = 0;
  for (const auto& base : bases) {
    for (double xi : {0.0, 0.3}) {
      Stream s(7, {key++});
      const auto draws = sample_latent_tfp(base, 1.0, 2.0, xi, 10000, s);
      const double d =
          ks_one_sample(draws, [&](double x) { return cdgpr_cdf_transform(base, x, 1.0, 2.0, xi); });
      CHECK(d < 0.02);
    }
  }
}

TEST_CASE("xi = 0 moments at n = 1e5") {
  const auto base = LatentDistSpec::student_t(6.0, 0.5, 1.5);
  const double mu = -1.0, sigma = 0.7;
  Stream s(99);
  const auto x = sample_latent_tfp(base, mu, sigma, 0.0, 100000, s);
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double var = ss / (n - 1);
  const double true_mean = mu + sigma * base.mean();
  const double true_var = sigma * sigma * base.variance();
  CHECK(std::abs(mean - true_mean) < 3.0 * std::sqrt(true_var / n));
  // Var of the sample variance for a t(6): 2 s^4 / n + kurtosis excess term.
  const double excess = 6.0 / (6.0 - 4.0);
  CHECK(std::abs(var - true_var) < 3.0 * true_var * std::sqrt((2.0 + excess) / n));
}

TEST_CASE("noise-free panel collapses to log V = theta") {
  DgpConfig c;
  c.noise.sd = 0.0;
  c.beta1 = 0.0;
  c.beta2 = 0.0;
  for (int y = c.first_year; y <= c.last_year(); ++y) c.beta0_by_year[y] = 0.0;
  c.n_amd = 5;
  c.n_bmd = 7;
  const auto sim = generate_panel(c);
  CHECK(sim.dataset.size() == 12u * 15u);
  std::map<std::string, double> theta;
  for (const auto& f : sim.truth.firms) theta[f.firm_id] = f.theta;
  for (const auto& o : sim.dataset.observations) CHECK(std::log(o.value_added) == doctest::Approx(theta[o.firm_id]));
}

TEST_CASE("generated data satisfy the production identity") {
  DgpConfig c;
  c.n_amd = 20;
  c.n_bmd = 30;
  c.xi = 0.2;
  c.mu = 0.5;
  c.sigma = 1.3;
  c.inputs.theta_correlation = 0.4;
  const auto sim = generate_panel(c);
  std::map<std::string, double> theta;
  for (const auto& f : sim.truth.firms) theta[f.firm_id] = f.theta;
  REQUIRE(sim.truth.noise.size() == sim.dataset.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sim.dataset.size(); ++i) {
    const auto& o = sim.dataset.observations[i];
    const double r = std::log(o.value_added) - c.beta0(o.year) - c.beta1 * std::log(o.capital) -
                     c.beta2 * std::log(o.labor);
    worst = std::max(worst, std::abs(r - (theta[o.firm_id] + sim.truth.noise[i])));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("generation is deterministic and thread-count invariant") {
  DgpConfig c;
  c.n_amd = 40;
  c.n_bmd = 40;
  c.seed = 2024;
  const auto a = generate_panel(c, 1);
  const auto b = generate_panel(c, 1);
  const auto t = generate_panel(c, 4);
  CHECK(a.dataset.observations == b.dataset.observations);
  CHECK(a.dataset.observations == t.dataset.observations);
  CHECK(a.truth.noise == t.truth.noise);
  c.seed = 2025;
  CHECK_FALSE(generate_panel(c).dataset.observations == a.dataset.observations);
}

TEST_CASE("AMD truncation bound") {
  DgpConfig c;
  c.xi = 0.5;
  c.mu = 1.0;
  c.sigma = 2.0;
  c.n_amd = 500;
  c.n_bmd = 10;
  const auto sim = generate_panel(c);
  for (const auto& f : sim.truth.firms) {
    if (f.area == Area::kAmd) CHECK(f.theta >= 1.0);
  }
}

TEST_CASE("noise laws have the requested sd and AR(1) correlation") {
  for (auto law : {NoiseLaw::kNormal, NoiseLaw::kUniform, NoiseLaw::kStudentT}) {
    NoiseSpec spec;
    spec.law = law;
    spec.sd = 0.5;
    spec.df = 8.0;
    Stream s(5, {static_cast<std::uint64_t>(law)});
    std::vector<double> x(200000);
    spec.draw(s, x);
    double ss = 0.0;
    for (double v : x) ss += v * v;
    CHECK(std::sqrt(ss / static_cast<double>(x.size())) == doctest::Approx(0.5).epsilon(0.02));
  }
  NoiseSpec ar;
  ar.ar1 = 0.6;
  Stream s(11);
  std::vector<double> x(200000);
  ar.draw(s, x);
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    c0 += x[t] * x[t];
    if (t > 0) c1 += x[t] * x[t - 1];
  }
  CHECK(c1 / c0 == doctest::Approx(0.6).epsilon(0.03));
  CHECK(c0 / static_cast<double>(x.size()) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("config validation") {
  DgpConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.sigma = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.xi = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.tenure = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.beta0_by_year = {{2000, 0.1}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.noise.sd = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("firm ids are zero-padded per area") {
  DgpConfig c;
  c.n_amd = 12;
  c.n_bmd = 3;
  c.tenure = 2;
  const auto sim = generate_panel(c);
  CHECK(sim.truth.firms.front().firm_id == "A01");
  CHECK(sim.truth.firms[11].firm_id == "A12");
  CHECK(sim.truth.firms.back().firm_id == "B3");
}
