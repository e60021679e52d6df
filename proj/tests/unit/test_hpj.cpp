#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "hpjks/hpj.hpp"

using namespace hpjks;

namespace {

TripleEstimate triple(double full, double h1, double h2, std::size_t tenure = 16) {
  TripleEstimate t;
  t.theta_full = full;
  t.theta_h1 = h1;
  t.theta_h2 = h2;
  t.tenure = tenure;
  return t;
}

std::vector<TripleEstimate> random_cell(std::size_t n, std::uint64_t seed, bool degenerate = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<TripleEstimate> cell;
  for (std::size_t i = 0; i < n; ++i) {
    const double th = nd(rng);
    const double u1 = degenerate ? 0.0 : 0.4 * nd(rng);
    const double u2 = degenerate ? 0.0 : 0.4 * nd(rng);
    cell.push_back(triple(th + 0.5 * (u1 + u2), th + u1, th + u2));
  }
  return cell;
}

double plain_ecdf(const std::vector<TripleEstimate>& cell, double x) {
  double c = 0.0;
  for (const auto& t : cell) c += t.theta_full <= x;
  return c / static_cast<double>(cell.size());
}

}  // namespace

TEST_CASE("hpj_combine arithmetic") {
  CHECK(hpj_combine(1.0, 0.8, 1.0).value == doctest::Approx(1.1));
  CHECK(hpj_combine(0.5, 0.6, 0.2).value == doctest::Approx(0.6));
  for (double c : {-3.5, 0.0, 1e-9, 7.25}) CHECK(hpj_combine(c, c, c).value == c);
  const auto d = hpj_combine(0.5, 0.6, 0.2);
  CHECK(d.plugin == 0.5);
  CHECK(d.half1 == 0.6);
  CHECK(d.half2 == 0.2);
}

TEST_CASE("debiased mean") {
  const std::vector<TripleEstimate> one{triple(2.5, 1.5, 3.5)};
  CHECK(debiased_mean(one).value == doctest::Approx(2.5));
  const std::vector<TripleEstimate> constant(5, triple(0.7, 0.7, 0.7));
  CHECK(debiased_mean(constant).value == doctest::Approx(0.7));
  CHECK_THROWS_AS(debiased_mean(std::vector<TripleEstimate>{}), std::invalid_argument);
}

TEST_CASE("debiased variance") {
  const std::vector<TripleEstimate> two{triple(0, 0, 0), triple(2, 2, 2)};
  const auto pop = debiased_variance(two, VarianceDivisor::kPopulation);
  CHECK(pop.plugin == doctest::Approx(1.0));
  CHECK(pop.half1 == doctest::Approx(1.0));
  CHECK(pop.half2 == doctest::Approx(1.0));
  CHECK(pop.value == doctest::Approx(1.0));
  CHECK(debiased_variance(two).value == doctest::Approx(2.0));

  CHECK_THROWS_AS(debiased_variance(std::vector<TripleEstimate>{triple(1, 1, 1)}), std::invalid_argument);

  const auto cell = random_cell(50, 3, true);
  const auto v = debiased_variance(cell);
  CHECK(v.value == doctest::Approx(v.plugin));

  // Halves far more dispersed than the full estimates push the value negative.
  const std::vector<TripleEstimate> bad{triple(0, -5, 5), triple(0.1, 5, -5), triple(0.2, 0, 0)};
  const auto b = debiased_variance(bad);
  CHECK(b.degenerate);
  CHECK(b.value < 0.0);
}

TEST_CASE("multiplicity weights equal explicit replication") {
  const auto cell = random_cell(6, 11);
  const std::vector<std::uint32_t> m{0, 2, 1, 0, 3, 1};
  std::vector<TripleEstimate> expanded;
  for (std::size_t i = 0; i < cell.size(); ++i) {
    for (std::uint32_t k = 0; k < m[i]; ++k) expanded.push_back(cell[i]);
  }
  CHECK(debiased_mean(cell, m).value == doctest::Approx(debiased_mean(expanded).value).epsilon(1e-13));
  CHECK(debiased_variance(cell, m).value == doctest::Approx(debiased_variance(expanded).value).epsilon(1e-13));
  CHECK_THROWS_AS(debiased_mean(cell, std::vector<std::uint32_t>{1, 2}), std::invalid_argument);
}

TEST_CASE("combination identity holds for every quantity") {
  const auto cell = random_cell(40, 5);
  for (const auto& s : {debiased_mean(cell), debiased_variance(cell)}) {
    CHECK(std::abs(s.value - (2 * s.plugin - (s.half1 + s.half2) / 2)) <= 1e-12);
  }
  const auto f = debiased_cdf(cell);
  for (std::size_t k = 0; k < f.jump_points().size(); ++k) {
    const double x = f.jump_points()[k];
    auto ecdf = [&](auto field) {
      double c = 0.0;
      for (const auto& t : cell) c += t.*field <= x;
      return c / static_cast<double>(cell.size());
    };
    const double expected = 2 * ecdf(&TripleEstimate::theta_full) -
                            (ecdf(&TripleEstimate::theta_h1) + ecdf(&TripleEstimate::theta_h2)) / 2;
    CHECK(std::abs(f.values()[k] - expected) <= 1e-12);
    CHECK(std::abs(f(x) - expected) <= 1e-12);
  }
}

TEST_CASE("debiased CDF of a single firm can exceed one") {
  const std::vector<TripleEstimate> one{triple(0.0, -1.0, 1.0)};
  const auto f = debiased_cdf(one);
  CHECK(f(0.0) == doctest::Approx(1.5));
  CHECK(f(-1.0) == doctest::Approx(-0.5));
  CHECK(f(-1.5) == 0.0);
  CHECK(f(1.0) == doctest::Approx(1.0));
  CHECK(f.jump_points() == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK(f.n_firms() == 1);
}

TEST_CASE("noise-free cell gives the plain empirical CDF") {
  const auto cell = random_cell(30, 8, true);
  const auto f = debiased_cdf(cell);
  for (double x = -3.0; x <= 3.0; x += 0.05) CHECK(f(x) == doctest::Approx(plain_ecdf(cell, x)));
  const auto m = debiased_mean(cell);
  CHECK(m.value == doctest::Approx(m.plugin));
}

TEST_CASE("CDF limits") {
  const auto f = debiased_cdf(random_cell(25, 2));
  CHECK(f(f.jump_points().front() - 1e-9) == 0.0);
  CHECK(f(f.jump_points().back()) == doctest::Approx(1.0));
  CHECK(f(1e300) == doctest::Approx(1.0));
  CHECK_THROWS_AS(debiased_cdf(std::vector<TripleEstimate>{}), std::invalid_argument);
}

TEST_CASE("affine equivariance") {
  const auto cell = random_cell(35, 13);
  const double c = 1.75, s = 2.5;
  auto shifted = cell, scaled = cell;
  for (auto& t : shifted) {
    t.theta_full += c;
    t.theta_h1 += c;
    t.theta_h2 += c;
  }
  for (auto& t : scaled) {
    t.theta_full *= s;
    t.theta_h1 *= s;
    t.theta_h2 *= s;
  }
  CHECK(debiased_mean(shifted).value == doctest::Approx(debiased_mean(cell).value + c));
  CHECK(debiased_variance(scaled).value == doctest::Approx(s * s * debiased_variance(cell).value));
  CHECK(debiased_variance(shifted).value == doctest::Approx(debiased_variance(cell).value));
  const auto f = debiased_cdf(cell), g = debiased_cdf(shifted);
  REQUIRE(f.jump_points().size() == g.jump_points().size());
  for (std::size_t k = 0; k < f.jump_points().size(); ++k) {
    CHECK(g.jump_points()[k] == doctest::Approx(f.jump_points()[k] + c));
    CHECK(g.values()[k] == f.values()[k]);
  }
}

TEST_CASE("plot clipping only touches plot values") {
  const std::vector<double> v{-0.1, 0.3, 0.25, 1.2, 1.0};
  const auto clipped = monotone_clip_for_plot(v);
  CHECK(clipped == std::vector<double>{0.0, 0.3, 0.3, 1.0, 1.0});
}

TEST_CASE("mean has no small-T bias and HPJ adds none") {
  // theta ~ N(0, 1), noise N(0, 1), T = 16: both means unbiased for E[theta].
  const std::size_t reps = 4000, n = 100, t = 16;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  double sum_p = 0.0, sum_d = 0.0, ss_p = 0.0, ss_d = 0.0;
  std::vector<TripleEstimate> cell(n);
  for (std::size_t r = 0; r < reps; ++r) {
    for (auto& tr : cell) {
      const double th = nd(rng);
      const double u1 = nd(rng) / std::sqrt(8.0), u2 = nd(rng) / std::sqrt(8.0);
      tr = triple(th + 0.5 * (u1 + u2), th + u1, th + u2, t);
    }
    const auto m = debiased_mean(cell);
    sum_p += m.plugin;
    sum_d += m.value;
    ss_p += m.plugin * m.plugin;
    ss_d += m.value * m.value;
  }
  const double R = static_cast<double>(reps);
  const double mp = sum_p / R, md = sum_d / R;
  const double se_p = std::sqrt((ss_p / R - mp * mp) / R), se_d = std::sqrt((ss_d / R - md * md) / R);
  CHECK(std::abs(mp) < 3 * se_p);
  CHECK(std::abs(md) < 3 * se_d);
}
