#include "hpjks/kstest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hpjks/error.hpp"
#include "hpjks/parallel.hpp"
#include "hpjks/rng.hpp"

namespace hpjks {

namespace {

// Jump weight of each coordinate in 2n * F:  2 * (2 * Fhat) - Fhat1 - Fhat2.
constexpr std::int64_t kFullWeight = 4;
constexpr std::int64_t kHalfWeight = -1;

struct Event {
  double z;
  std::int64_t w;
};

/// All 3n coordinate values of a cell in ascending order, remembering which
/// firm and which coordinate each came from. Resampling only reweights
/// entries and standardization is increasing, so this order is reused by
/// every bootstrap draw.
struct SortedEntries {
  std::vector<double> x;
  std::vector<std::uint32_t> firm;
  std::vector<std::int8_t> weight;
};

SortedEntries sort_entries(std::span<const TripleEstimate> cell) {
  struct Entry {
    double x;
    std::uint32_t firm;
    std::int8_t weight;
  };
  std::vector<Entry> all;
  all.reserve(3 * cell.size());
  for (std::size_t i = 0; i < cell.size(); ++i) {
    const auto f = static_cast<std::uint32_t>(i);
    all.push_back({cell[i].theta_full, f, static_cast<std::int8_t>(kFullWeight)});
    all.push_back({cell[i].theta_h1, f, static_cast<std::int8_t>(kHalfWeight)});
    all.push_back({cell[i].theta_h2, f, static_cast<std::int8_t>(kHalfWeight)});
  }
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.x < b.x; });
  SortedEntries out;
  out.x.reserve(all.size());
  out.firm.reserve(all.size());
  out.weight.reserve(all.size());
  for (const auto& e : all) {
    out.x.push_back(e.x);
    out.firm.push_back(e.firm);
    out.weight.push_back(e.weight);
  }
  return out;
}

void append_events(const SortedEntries& entries, double mean, double sd, std::span<const std::uint32_t> multiplicity,
                   std::int64_t scale, std::vector<Event>& out) {
  out.clear();
  for (std::size_t k = 0; k < entries.x.size(); ++k) {
    const std::int64_t m = multiplicity.empty() ? 1 : multiplicity[entries.firm[k]];
    if (m == 0) continue;
    out.push_back({(entries.x[k] - mean) / sd, entries.weight[k] * m * scale});
  }
}

bool by_z(const Event& a, const Event& b) { return a.z < b.z; }

/// Largest |partial sum| after each group of equal abscissae. The partial
/// sums are the step function's values on [z_k, z_{k+1}); together with the
/// zero value left of everything they cover all left and right limits.
std::int64_t sup_abs(std::span<const Event> sorted) {
  std::int64_t cum = 0;
  std::int64_t best = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cum += sorted[i].w;
    if (i + 1 == sorted.size() || sorted[i + 1].z != sorted[i].z) best = std::max(best, std::abs(cum));
  }
  return best;
}

struct Standardization {
  double mean;
  double sd;
};

/// Merged, standardized jump events of F_amd - F_bmd scaled by 2 n_a n_b.
void difference_events(const SortedEntries& amd, Standardization sa, std::span<const std::uint32_t> ma,
                       const SortedEntries& bmd, Standardization sb, std::span<const std::uint32_t> mb,
                       std::int64_t n_amd, std::int64_t n_bmd, std::vector<Event>& scratch_a,
                       std::vector<Event>& scratch_b, std::vector<Event>& out) {
  append_events(amd, sa.mean, sa.sd, ma, n_bmd, scratch_a);
  append_events(bmd, sb.mean, sb.sd, mb, -n_amd, scratch_b);
  out.resize(scratch_a.size() + scratch_b.size());
  std::merge(scratch_a.begin(), scratch_a.end(), scratch_b.begin(), scratch_b.end(), out.begin(), by_z);
}

SortedEntries entries_from_cdf(const DebiasedCdf& cdf) {
  SortedEntries out;
  struct Entry {
    double x;
    std::int8_t weight;
  };
  std::vector<Entry> all;
  all.reserve(3 * cdf.n_firms());
  for (double x : cdf.full()) all.push_back({x, static_cast<std::int8_t>(kFullWeight)});
  for (double x : cdf.half1()) all.push_back({x, static_cast<std::int8_t>(kHalfWeight)});
  for (double x : cdf.half2()) all.push_back({x, static_cast<std::int8_t>(kHalfWeight)});
  std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.x < b.x; });
  for (const auto& e : all) {
    out.x.push_back(e.x);
    out.firm.push_back(0);
    out.weight.push_back(e.weight);
  }
  return out;
}

std::size_t min_tenure_of(std::span<const TripleEstimate> cell) {
  std::size_t t = cell.empty() ? 0 : cell.front().tenure;
  for (const auto& c : cell) t = std::min(t, c.tenure);
  return t;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

CellSummary summarize_cell(std::span<const TripleEstimate> cell) {
  if (cell.size() < 2) throw std::invalid_argument("a cell needs at least two firms to be standardized");
  CellSummary s;
  s.sector = cell.front().sector;
  s.area = cell.front().area;
  s.n_firms = cell.size();
  s.min_tenure = min_tenure_of(cell);
  s.mean = debiased_mean(cell);
  s.variance = debiased_variance(cell);
  if (s.variance.degenerate) {
    throw DegenerateVarianceError("debiased variance is not positive (" + format_number(s.variance.value) +
                                  ") in " + s.sector + "/" + std::string(to_string(s.area)));
  }
  s.sd = std::sqrt(s.variance.value);
  s.cdf = debiased_cdf(cell);
  return s;
}

double ks_statistic(const CellSummary& amd, const CellSummary& bmd) {
  if (!(amd.sd > 0.0) || !(bmd.sd > 0.0)) throw DegenerateVarianceError("ks_statistic needs positive scales");
  const auto ea = entries_from_cdf(amd.cdf);
  const auto eb = entries_from_cdf(bmd.cdf);
  const auto na = static_cast<std::int64_t>(amd.n_firms);
  const auto nb = static_cast<std::int64_t>(bmd.n_firms);
  std::vector<Event> sa, sb, merged;
  difference_events(ea, {amd.mean.value, amd.sd}, {}, eb, {bmd.mean.value, bmd.sd}, {}, na, nb, sa, sb, merged);
  return static_cast<double>(sup_abs(merged)) / static_cast<double>(2 * na * nb);
}

double standardized_difference(const CellSummary& amd, const CellSummary& bmd, double z) {
  return amd.standardized_cdf(z) - bmd.standardized_cdf(z);
}

double validity_ratio(std::size_t n_amd, std::size_t n_bmd, std::size_t t_min) {
  if (t_min < 2) throw std::invalid_argument("validity_ratio: t_min must be at least 2");
  const double t = static_cast<double>(t_min);
  return static_cast<double>(std::max(n_amd, n_bmd)) / (t * t * t * t);
}

TestResult bootstrap_test(std::span<const TripleEstimate> amd, std::span<const TripleEstimate> bmd,
                          const BootstrapOptions& options) {
  if (options.replications < 1) throw std::invalid_argument("bootstrap needs at least one replication");
  const CellSummary obs_a = summarize_cell(amd);
  const CellSummary obs_b = summarize_cell(bmd);

  TestResult result;
  result.sector = obs_a.sector;
  result.n_amd = amd.size();
  result.n_bmd = bmd.size();
  result.n_bootstrap = options.replications;
  result.t_min = std::min(obs_a.min_tenure, obs_b.min_tenure);
  result.validity_ratio = validity_ratio(result.n_amd, result.n_bmd, result.t_min);
  if (result.validity_ratio > options.validity_threshold) {
    result.warnings.push_back("validity ratio max(N)/T^4 = " + format_number(result.validity_ratio) +
                              " exceeds " + format_number(options.validity_threshold));
  }

  const auto na = static_cast<std::int64_t>(amd.size());
  const auto nb = static_cast<std::int64_t>(bmd.size());
  const SortedEntries ea = sort_entries(amd);
  const SortedEntries eb = sort_entries(bmd);

  std::vector<Event> observed;
  {
    std::vector<Event> sa, sb;
    difference_events(ea, {obs_a.mean.value, obs_a.sd}, {}, eb, {obs_b.mean.value, obs_b.sd}, {}, na, nb, sa, sb,
                      observed);
  }
  const std::int64_t observed_sup = sup_abs(observed);
  const double denom = static_cast<double>(2 * na * nb);
  result.statistic = static_cast<double>(observed_sup) / denom;

  // Recentering subtracts the observed function: merge its negated events in.
  std::vector<Event> negated = observed;
  for (auto& e : negated) e.w = -e.w;

  constexpr std::int64_t kDegenerate = -1;
  std::vector<std::int64_t> draws(options.replications, kDegenerate);
  parallel_for(options.replications, options.threads, [&](std::size_t b) {
    Stream stream(options.seed, {static_cast<std::uint64_t>(b)});
    std::vector<std::uint32_t> ma(amd.size(), 0), mb(bmd.size(), 0);
    std::uniform_int_distribution<std::size_t> pick_a(0, amd.size() - 1);
    for (std::size_t i = 0; i < amd.size(); ++i) ++ma[pick_a(stream)];
    std::uniform_int_distribution<std::size_t> pick_b(0, bmd.size() - 1);
    for (std::size_t i = 0; i < bmd.size(); ++i) ++mb[pick_b(stream)];

    const DebiasedScalar var_a = debiased_variance(amd, ma);
    const DebiasedScalar var_b = debiased_variance(bmd, mb);
    if (var_a.degenerate || var_b.degenerate) return;
    const Standardization sa{debiased_mean(amd, ma).value, std::sqrt(var_a.value)};
    const Standardization sb{debiased_mean(bmd, mb).value, std::sqrt(var_b.value)};

    std::vector<Event> buf_a, buf_b, boot, merged;
    difference_events(ea, sa, ma, eb, sb, mb, na, nb, buf_a, buf_b, boot);
    merged.resize(boot.size() + negated.size());
    std::merge(boot.begin(), boot.end(), negated.begin(), negated.end(), merged.begin(), by_z);
    draws[b] = sup_abs(merged);
  });

  for (std::int64_t d : draws) {
    if (d == kDegenerate) {
      ++result.degenerate_draws;
      continue;
    }
    ++result.completed_draws;
    if (d >= observed_sup) ++result.exceedances;
    result.bootstrap_statistics.push_back(static_cast<double>(d) / denom);
  }
  result.p_value = static_cast<double>(1 + result.exceedances) / static_cast<double>(1 + result.completed_draws);
  if (result.degenerate_draws > 0) {
    result.warnings.push_back(std::to_string(result.degenerate_draws) +
                              " bootstrap draws discarded for non-positive debiased variance");
  }
  return result;
}

}  // namespace hpjks
