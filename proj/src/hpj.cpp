#include "hpjks/hpj.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpjks {

DebiasedScalar hpj_combine(double plugin, double half1, double half2) noexcept {
  return {2.0 * plugin - (half1 + half2) / 2.0, plugin, half1, half2, false};
}

namespace {

void check_weights(std::span<const TripleEstimate> cell, std::span<const std::uint32_t> multiplicity) {
  if (multiplicity.size() != cell.size()) throw std::invalid_argument("multiplicity size must match the cell size");
}

struct Sums {
  double full = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  double n = 0.0;
};

template <typename Weight>
Sums weighted_means(std::span<const TripleEstimate> cell, Weight weight) {
  Sums s;
  for (std::size_t i = 0; i < cell.size(); ++i) {
    const double w = weight(i);
    s.full += w * cell[i].theta_full;
    s.h1 += w * cell[i].theta_h1;
    s.h2 += w * cell[i].theta_h2;
    s.n += w;
  }
  s.full /= s.n;
  s.h1 /= s.n;
  s.h2 /= s.n;
  return s;
}

template <typename Weight>
DebiasedScalar variance_impl(std::span<const TripleEstimate> cell, Weight weight, VarianceDivisor divisor) {
  const Sums m = weighted_means(cell, weight);
  Sums ss;
  for (std::size_t i = 0; i < cell.size(); ++i) {
    const double w = weight(i);
    const double d0 = cell[i].theta_full - m.full;
    const double d1 = cell[i].theta_h1 - m.h1;
    const double d2 = cell[i].theta_h2 - m.h2;
    ss.full += w * d0 * d0;
    ss.h1 += w * d1 * d1;
    ss.h2 += w * d2 * d2;
  }
  const double denom = divisor == VarianceDivisor::kSample ? m.n - 1.0 : m.n;
  DebiasedScalar out = hpj_combine(ss.full / denom, ss.h1 / denom, ss.h2 / denom);
  out.degenerate = !(out.value > 0.0) || !std::isfinite(out.value);
  return out;
}

}  // namespace

DebiasedScalar debiased_mean(std::span<const TripleEstimate> cell) {
  if (cell.empty()) throw std::invalid_argument("debiased_mean: empty cell");
  const Sums m = weighted_means(cell, [](std::size_t) { return 1.0; });
  return hpj_combine(m.full, m.h1, m.h2);
}

DebiasedScalar debiased_mean(std::span<const TripleEstimate> cell, std::span<const std::uint32_t> multiplicity) {
  check_weights(cell, multiplicity);
  if (cell.empty()) throw std::invalid_argument("debiased_mean: empty cell");
  const Sums m = weighted_means(cell, [&](std::size_t i) { return static_cast<double>(multiplicity[i]); });
  if (!(m.n > 0.0)) throw std::invalid_argument("debiased_mean: zero total weight");
  return hpj_combine(m.full, m.h1, m.h2);
}

DebiasedScalar debiased_variance(std::span<const TripleEstimate> cell, VarianceDivisor divisor) {
  if (cell.size() < 2) throw std::invalid_argument("debiased_variance: need at least two firms");
  return variance_impl(cell, [](std::size_t) { return 1.0; }, divisor);
}

DebiasedScalar debiased_variance(std::span<const TripleEstimate> cell, std::span<const std::uint32_t> multiplicity,
                                 VarianceDivisor divisor) {
  check_weights(cell, multiplicity);
  std::uint64_t total = 0;
  for (auto m : multiplicity) total += m;
  if (total < 2) throw std::invalid_argument("debiased_variance: need at least two draws");
  return variance_impl(cell, [&](std::size_t i) { return static_cast<double>(multiplicity[i]); }, divisor);
}

DebiasedCdf::DebiasedCdf(std::vector<double> full, std::vector<double> half1, std::vector<double> half2)
    : full_(std::move(full)), half1_(std::move(half1)), half2_(std::move(half2)) {
  if (full_.empty() || full_.size() != half1_.size() || full_.size() != half2_.size()) {
    throw std::invalid_argument("DebiasedCdf: the three samples must be non-empty and equally sized");
  }
  std::sort(full_.begin(), full_.end());
  std::sort(half1_.begin(), half1_.end());
  std::sort(half2_.begin(), half2_.end());

  jump_points_.reserve(3 * full_.size());
  jump_points_.insert(jump_points_.end(), full_.begin(), full_.end());
  jump_points_.insert(jump_points_.end(), half1_.begin(), half1_.end());
  jump_points_.insert(jump_points_.end(), half2_.begin(), half2_.end());
  std::sort(jump_points_.begin(), jump_points_.end());
  jump_points_.erase(std::unique(jump_points_.begin(), jump_points_.end()), jump_points_.end());

  // One sweep: counts of each sample at or below the current jump point.
  const double n = static_cast<double>(full_.size());
  std::size_t c0 = 0, c1 = 0, c2 = 0;
  values_.reserve(jump_points_.size());
  for (double x : jump_points_) {
    while (c0 < full_.size() && full_[c0] <= x) ++c0;
    while (c1 < half1_.size() && half1_[c1] <= x) ++c1;
    while (c2 < half2_.size() && half2_[c2] <= x) ++c2;
    values_.push_back(hpj_combine(c0 / n, c1 / n, c2 / n).value);
  }
}

double DebiasedCdf::operator()(double x) const {
  if (full_.empty()) return 0.0;
  auto count = [x](const std::vector<double>& v) {
    return static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
  };
  const double n = static_cast<double>(full_.size());
  return hpj_combine(count(full_) / n, count(half1_) / n, count(half2_) / n).value;
}

DebiasedCdf debiased_cdf(std::span<const TripleEstimate> cell) {
  if (cell.empty()) throw std::invalid_argument("debiased_cdf: empty cell");
  std::vector<double> full, h1, h2;
  full.reserve(cell.size());
  h1.reserve(cell.size());
  h2.reserve(cell.size());
  for (const auto& t : cell) {
    full.push_back(t.theta_full);
    h1.push_back(t.theta_h1);
    h2.push_back(t.theta_h2);
  }
  return DebiasedCdf(std::move(full), std::move(h1), std::move(h2));
}

std::vector<double> monotone_clip_for_plot(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  double running = 0.0;
  for (double v : values) {
    running = std::max(running, std::clamp(v, 0.0, 1.0));
    out.push_back(running);
  }
  return out;
}

}  // namespace hpjks
