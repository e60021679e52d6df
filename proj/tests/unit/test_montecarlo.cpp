#include <algorithm>
#include <cmath>
#include <string>

#include "doctest.h"
#include "hpjks/montecarlo.hpp"

using namespace hpjks;

namespace {

ExperimentConfig small_size_config() {
  ExperimentConfig c;
  c.kind = ExperimentKind::kSize;
  c.base.n_amd = 30;
  c.base.n_bmd = 30;
  c.base.tenure = 8;
  c.base.mu = 1.0;
  c.base.sigma = 2.0;
  c.replications = 8;
  c.bootstrap = 19;
  c.master_seed = 17;
  return c;
}

}  // namespace

TEST_CASE("grid expansion order and defaults") {
  ExperimentConfig c;
  c.base.n_bmd = 77;
  c.grid.xi = {0.0, 0.2, 0.4};
  c.grid.tenure = {8, 16};
  const auto g = expand_grid(c);
  REQUIRE(g.size() == 6);
  CHECK(g[0].xi == 0.0);
  CHECK(g[0].tenure == 8);
  CHECK(g[1].tenure == 16);
  CHECK(g[2].xi == 0.2);
  CHECK(g[5].xi == 0.4);
  for (const auto& p : g) {
    CHECK(p.firms == 77);
    CHECK(p.noise_sd == c.base.noise.sd);
  }
}

TEST_CASE("config validation") {
  auto c = small_size_config();
  CHECK_NOTHROW(c.validate());
  c.alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_size_config();
  c.replications = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_size_config();
  c.grid.xi = {1.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_size_config();
  c.eval_probabilities = {0.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(parse_experiment_kind("bias") == ExperimentKind::kBiasOrder);
  CHECK_THROWS_AS(parse_experiment_kind("nope"), std::invalid_argument);
}

TEST_CASE("size experiment preconditions") {
  auto c = small_size_config();
  c.grid.xi = {0.0, 0.1};
  CHECK_THROWS_AS(run_size_experiment(c), std::invalid_argument);
  c = small_size_config();
  c.base.amd_latent = LatentDistSpec::student_t(3.0);
  CHECK_THROWS_AS(run_size_experiment(c), std::invalid_argument);
  c = small_size_config();
  CHECK_THROWS_AS(run_power_experiment(c), std::invalid_argument);
}

TEST_CASE("one replication gives a 0/1 rate and zero standard error") {
  auto c = small_size_config();
  c.replications = 1;
  const auto s = run_size_experiment(c);
  REQUIRE(s.rejection_rows.size() == 1);
  const auto& r = s.rejection_rows[0];
  CHECK((r.rejection_rate == 0.0 || r.rejection_rate == 1.0));
  CHECK(r.mc_se == 0.0);
}

TEST_CASE("rates and standard errors follow the binomial formula") {
  auto c = small_size_config();
  c.replications = 20;
  c.alpha = 0.5;
  const auto s = run_size_experiment(c);
  const auto& r = s.rejection_rows.at(0);
  CHECK(r.replications + r.failed == 20);
  CHECK(r.rejection_rate == static_cast<double>(r.rejections) / static_cast<double>(r.replications));
  CHECK(r.mc_se == doctest::Approx(std::sqrt(r.rejection_rate * (1 - r.rejection_rate) / r.replications)));
  CHECK(r.rejection_rate >= 0.0);
  CHECK(r.rejection_rate <= 1.0);
}

TEST_CASE("experiments are reproducible and thread-count invariant") {
  auto c = small_size_config();
  const auto a = summary_csv(run_size_experiment(c));
  const auto b = summary_csv(run_size_experiment(c));
  c.threads = 3;
  const auto t = summary_csv(run_size_experiment(c));
  CHECK(a == b);
  CHECK(a == t);
  CHECK(a.find("rejection_rate") != std::string::npos);
  c.master_seed = 18;
  CHECK(summary_csv(run_size_experiment(c)) != a);
}

TEST_CASE("power experiment rows and monotonicity report") {
  auto c = small_size_config();
  c.kind = ExperimentKind::kPower;
  c.grid.xi = {0.0, 0.2, 0.4};
  c.replications = 4;
  const auto s = run_experiment(c);
  CHECK(s.rejection_rows.size() == 3);
  REQUIRE(s.report.size() == 1);
  CHECK(s.report[0].find("xi") != std::string::npos);
  // Header plus one line per grid point.
  const auto csv = summary_csv(s);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  c.grid.xi = {};
  c.base.amd_latent = LatentDistSpec::student_t(3.0);
  CHECK_NOTHROW(run_power_experiment(c));
}

TEST_CASE("size does not depend on location and scale") {
  ExperimentConfig c;
  c.base.n_amd = c.base.n_bmd = 40;
  c.base.tenure = 8;
  c.grid.mu = {0.0, 5.0};
  c.grid.sigma = {0.5, 3.0};
  c.replications = 60;
  c.bootstrap = 39;
  c.alpha = 0.1;
  c.master_seed = 5;
  const auto s = run_size_experiment(c);
  REQUIRE(s.rejection_rows.size() == 4);
  const auto& base = s.rejection_rows[0];
  for (const auto& r : s.rejection_rows) {
    const double joint = std::sqrt(base.mc_se * base.mc_se + r.mc_se * r.mc_se);
    CHECK(std::abs(r.rejection_rate - base.rejection_rate) <= 3.0 * joint + 1e-12);
  }
}

TEST_CASE("bias check preconditions and the noise-free case") {
  ExperimentConfig c;
  c.kind = ExperimentKind::kBiasOrder;
  c.base.n_bmd = 200;
  c.grid.tenure = {8, 12};
  c.replications = 50;
  CHECK_THROWS_AS(bias_order_check(c), std::invalid_argument);

  c.grid.tenure = {8, 16};
  c.grid.noise_sd = {0.0};
  const auto s = bias_order_check(c);
  REQUIRE(s.bias_rows.size() == 6);
  for (const auto& r : s.bias_rows) {
    CHECK(r.plugin_bias == 0.0);
    CHECK(r.debiased_bias == 0.0);
  }
  for (const auto& v : s.variance_rows) CHECK(v.plugin_mean == doctest::Approx(v.debiased_mean));
}

TEST_CASE("bias check shows first-order plug-in bias off the median") {
  ExperimentConfig c;
  c.kind = ExperimentKind::kBiasOrder;
  c.base.n_bmd = 500;
  c.grid.tenure = {4, 8};
  c.replications = 400;
  c.eval_probabilities = {0.2};
  const auto s = bias_order_check(c);
  REQUIRE(s.ratios.size() == 1);
  // At the 20% quantile of N(0,1) the plug-in CDF is biased upward.
  for (const auto& r : s.bias_rows) CHECK(r.plugin_bias > 3 * r.plugin_se);
  CHECK(s.ratios[0].plugin_ratio > 1.3);
  CHECK(std::abs(s.bias_rows[1].debiased_bias) < std::abs(s.bias_rows[1].plugin_bias));
}

TEST_CASE("per-period noise path agrees with the exact half-panel path") {
  ExperimentConfig c;
  c.kind = ExperimentKind::kBiasOrder;
  c.base.n_bmd = 300;
  c.grid.tenure = {4, 8};
  c.replications = 300;
  c.eval_probabilities = {0.2};
  const auto fast = bias_order_check(c);
  c.noise_simulation = NoiseSimulation::kPerPeriod;
  const auto slow = bias_order_check(c);
  for (std::size_t k = 0; k < fast.bias_rows.size(); ++k) {
    const auto& f = fast.bias_rows[k];
    const auto& p = slow.bias_rows[k];
    const double se = std::hypot(f.plugin_se, p.plugin_se);
    CHECK(std::abs(f.plugin_bias - p.plugin_bias) < 4 * se);
  }
}

TEST_CASE("summary text lists every grid point") {
  auto c = small_size_config();
  c.grid.firms = {20, 30};
  c.replications = 2;
  const auto s = run_size_experiment(c);
  const auto text = summary_text(s);
  CHECK(text.find("Monte Carlo experiment: size") == 0);
  CHECK(s.rejection_rows.size() == 2);
}
