#include "hpjks/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "csv_util.hpp"
#include "hpjks/error.hpp"
#include "hpjks/kstest.hpp"
#include "hpjks/parallel.hpp"
#include "hpjks/prodfn.hpp"

namespace hpjks {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSize: return "size";
    case ExperimentKind::kPower: return "power";
    case ExperimentKind::kBiasOrder: return "bias";
  }
  return "size";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "size") return ExperimentKind::kSize;
  if (name == "power") return ExperimentKind::kPower;
  if (name == "bias") return ExperimentKind::kBiasOrder;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

void ExperimentConfig::validate() const {
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (bootstrap < 1) throw std::invalid_argument("bootstrap must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  for (double p : eval_probabilities) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("evaluation probabilities must lie in (0, 1)");
  }
  for (const auto& pt : expand_grid(*this)) {
    DgpConfig d = base;
    d.xi = pt.xi;
    d.tenure = pt.tenure;
    d.noise.sd = pt.noise_sd;
    d.mu = pt.mu;
    d.sigma = pt.sigma;
    d.validate();
    if (pt.firms < 2) throw std::invalid_argument("each area needs at least two firms");
  }
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& c) {
  auto axis = [](const auto& values, auto fallback) {
    using T = std::decay_t<decltype(fallback)>;
    return values.empty() ? std::vector<T>{fallback} : std::vector<T>(values.begin(), values.end());
  };
  const auto xis = axis(c.grid.xi, c.base.xi);
  const auto firms = axis(c.grid.firms, c.base.n_bmd);
  const auto tenures = axis(c.grid.tenure, c.base.tenure);
  const auto noises = axis(c.grid.noise_sd, c.base.noise.sd);
  const auto mus = axis(c.grid.mu, c.base.mu);
  const auto sigmas = axis(c.grid.sigma, c.base.sigma);
  std::vector<GridPoint> out;
  for (double xi : xis)
    for (std::size_t n : firms)
      for (int t : tenures)
        for (double sd : noises)
          for (double mu : mus)
            for (double sigma : sigmas) out.push_back({xi, n, t, sd, mu, sigma});
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

DgpConfig point_config(const ExperimentConfig& c, const GridPoint& pt, std::uint64_t seed) {
  DgpConfig d = c.base;
  d.xi = pt.xi;
  d.n_amd = pt.firms;
  d.n_bmd = pt.firms;
  d.tenure = pt.tenure;
  d.noise.sd = pt.noise_sd;
  d.mu = pt.mu;
  d.sigma = pt.sigma;
  d.seed = seed;
  return d;
}

double sample_variance(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

struct RepOutcome {
  bool ok = false;
  bool reject = false;
  double p_value = 0.0;
  double plugin_variance_error = 0.0;
  double debiased_variance_error = 0.0;
  std::size_t degenerate_draws = 0;
};

RepOutcome run_test_replication(const ExperimentConfig& c, const GridPoint& pt, std::uint64_t g, std::uint64_t r) {
  const DgpConfig d = point_config(c, pt, derive_seed(c.master_seed, {g, r, 0}));
  const SimulatedPanel sim = generate_panel(d);
  const auto cells = estimate_cells(sim.dataset, pt.tenure);

  const CellEstimates* amd = nullptr;
  const CellEstimates* bmd = nullptr;
  for (const auto& cell : cells) (cell.area == Area::kAmd ? amd : bmd) = &cell;
  if (!amd || !bmd) throw std::logic_error("simulated panel lacks an area cell");

  RepOutcome out;
  std::vector<double> true_bmd;
  for (const auto& f : sim.truth.firms) {
    if (f.area == Area::kBmd) true_bmd.push_back(f.theta);
  }
  const DebiasedScalar var_bmd = debiased_variance(bmd->triples);
  const double truth = sample_variance(true_bmd);
  out.plugin_variance_error = var_bmd.plugin - truth;
  out.debiased_variance_error = var_bmd.value - truth;

  BootstrapOptions opts;
  opts.replications = c.bootstrap;
  opts.seed = derive_seed(c.master_seed, {g, r, 1});
  opts.threads = 1;
  opts.validity_threshold = std::numeric_limits<double>::infinity();
  try {
    const TestResult res = bootstrap_test(amd->triples, bmd->triples, opts);
    out.ok = true;
    out.p_value = res.p_value;
    out.reject = res.p_value <= c.alpha;
    out.degenerate_draws = res.degenerate_draws;
  } catch (const DegenerateVarianceError&) {
    out.ok = false;
  }
  return out;
}

MonteCarloSummary run_rejection_experiment(const ExperimentConfig& c, ExperimentKind kind) {
  const auto start = Clock::now();
  const auto grid = expand_grid(c);
  const std::size_t reps = c.replications;
  std::vector<RepOutcome> outcomes(grid.size() * reps);
  parallel_for(outcomes.size(), c.threads, [&](std::size_t k) {
    const std::size_t g = k / reps;
    outcomes[k] = run_test_replication(c, grid[g], g, k % reps);
  });

  MonteCarloSummary s;
  s.kind = kind;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    RejectionRow row;
    row.point = grid[g];
    double p_sum = 0.0, pv = 0.0, dv = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& o = outcomes[g * reps + r];
      pv += o.plugin_variance_error;
      dv += o.debiased_variance_error;
      if (!o.ok) {
        ++row.failed;
        continue;
      }
      ++row.replications;
      row.rejections += o.reject ? 1 : 0;
      row.degenerate_draws += o.degenerate_draws;
      p_sum += o.p_value;
    }
    if (row.replications > 0) {
      const double n = static_cast<double>(row.replications);
      row.rejection_rate = static_cast<double>(row.rejections) / n;
      row.mc_se = std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) / n);
      row.mean_p_value = p_sum / n;
    }
    row.plugin_variance_bias = pv / static_cast<double>(reps);
    row.debiased_variance_bias = dv / static_cast<double>(reps);
    s.rejection_rows.push_back(row);
  }
  s.wall_clock_seconds = seconds_since(start);
  return s;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

/// Nondecreasing check of rejection rates along one axis with the others fixed.
template <typename Key, typename Axis>
void monotonicity_report(const std::vector<RejectionRow>& rows, Key key, Axis axis, const std::string& axis_name,
                         std::vector<std::string>& report) {
  std::map<decltype(key(rows.front().point)), std::vector<const RejectionRow*>> groups;
  for (const auto& r : rows) groups[key(r.point)].push_back(&r);
  for (auto& [k, members] : groups) {
    if (members.size() < 2) continue;
    std::stable_sort(members.begin(), members.end(),
                     [&](const RejectionRow* a, const RejectionRow* b) { return axis(a->point) < axis(b->point); });
    bool monotone = true;
    std::string trail;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i > 0 && members[i]->rejection_rate < members[i - 1]->rejection_rate) monotone = false;
      if (i > 0) trail += " -> ";
      trail += fmt("%.3f", members[i]->rejection_rate);
    }
    report.push_back("rejection rate across " + axis_name + ": " + trail +
                     (monotone ? " (nondecreasing)" : " (NOT monotone)"));
  }
}

}  // namespace

MonteCarloSummary run_size_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.base.amd_latent && !(*config.base.amd_latent == config.base.latent)) {
    throw std::invalid_argument("size experiment needs the same base law in both areas");
  }
  for (const auto& pt : expand_grid(config)) {
    if (pt.xi != 0.0) throw std::invalid_argument("size experiment needs xi = 0 at every grid point");
  }
  return run_rejection_experiment(config, ExperimentKind::kSize);
}

MonteCarloSummary run_power_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto grid = expand_grid(config);
  const bool shape_change = config.base.amd_latent && !(*config.base.amd_latent == config.base.latent);
  const bool truncation = std::any_of(grid.begin(), grid.end(), [](const GridPoint& p) { return p.xi > 0.0; });
  if (!shape_change && !truncation) {
    throw std::invalid_argument("power experiment needs some xi > 0 or a different AMD base law");
  }
  MonteCarloSummary s = run_rejection_experiment(config, ExperimentKind::kPower);
  const auto& rows = s.rejection_rows;
  monotonicity_report(
      rows, [](const GridPoint& p) { return std::make_tuple(p.firms, p.tenure, p.noise_sd, p.mu, p.sigma); },
      [](const GridPoint& p) { return p.xi; }, "xi", s.report);
  monotonicity_report(
      rows, [](const GridPoint& p) { return std::make_tuple(p.xi, p.tenure, p.noise_sd, p.mu, p.sigma); },
      [](const GridPoint& p) { return p.firms; }, "N", s.report);
  return s;
}

MonteCarloSummary bias_order_check(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto grid = expand_grid(config);

  bool has_pair = false;
  for (const auto& a : grid) {
    for (const auto& b : grid) has_pair = has_pair || b.tenure == 2 * a.tenure;
  }
  if (!has_pair) throw std::invalid_argument("bias check needs tenures T and 2T on the grid");

  const auto& latent = config.base.latent;
  const auto& noise = config.base.noise;
  const bool fast = config.noise_simulation == NoiseSimulation::kAuto && noise.law == NoiseLaw::kNormal &&
                    noise.ar1 == 0.0;
  const std::size_t n_eval = config.eval_probabilities.size();
  const std::size_t reps = config.replications;
  // Per replication: for each evaluation point {plugin, debiased, plugin raw,
  // debiased raw}, then {plugin variance, debiased variance}.
  const std::size_t width = 4 * n_eval + 2;

  MonteCarloSummary s;
  s.kind = ExperimentKind::kBiasOrder;

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const GridPoint pt = grid[g];
    std::vector<double> eval(n_eval);
    for (std::size_t e = 0; e < n_eval; ++e) {
      eval[e] = latent_from_uniform(latent, pt.mu, pt.sigma, pt.xi, config.eval_probabilities[e]);
    }
    const auto t = static_cast<std::size_t>(pt.tenure);
    const std::size_t h = first_half_length(t);
    const double sd1 = pt.noise_sd / std::sqrt(static_cast<double>(h));
    const double sd2 = pt.noise_sd / std::sqrt(static_cast<double>(t - h));
    NoiseSpec point_noise = noise;
    point_noise.sd = pt.noise_sd;

    std::vector<double> per_rep(reps * width);
    parallel_for(reps, config.threads, [&](std::size_t r) {
      Stream stream(config.master_seed, {static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(r)});
      std::normal_distribution<double> nd(0.0, 1.0);
      std::vector<TripleEstimate> triples(pt.firms);
      std::vector<double> theta(pt.firms);
      std::vector<double> series(t);
      for (std::size_t i = 0; i < pt.firms; ++i) {
        theta[i] = latent_from_uniform(latent, pt.mu, pt.sigma, pt.xi, stream.open_uniform());
        if (fast) {
          const double u1 = sd1 * nd(stream);
          const double u2 = sd2 * nd(stream);
          auto& tr = triples[i];
          tr.theta_h1 = theta[i] + u1;
          tr.theta_h2 = theta[i] + u2;
          tr.theta_full = theta[i] + (static_cast<double>(h) * u1 + static_cast<double>(t - h) * u2) /
                                         static_cast<double>(t);
          tr.tenure = t;
        } else {
          point_noise.draw(stream, series);
          for (auto& u : series) u += theta[i];
          triples[i] = triple_from_residuals(series);
        }
      }
      double* out = &per_rep[r * width];
      const double n = static_cast<double>(pt.firms);
      for (std::size_t e = 0; e < n_eval; ++e) {
        std::size_t c0 = 0, c1 = 0, c2 = 0, ct = 0;
        for (std::size_t i = 0; i < pt.firms; ++i) {
          c0 += triples[i].theta_full <= eval[e];
          c1 += triples[i].theta_h1 <= eval[e];
          c2 += triples[i].theta_h2 <= eval[e];
          ct += theta[i] <= eval[e];
        }
        const double plugin = static_cast<double>(c0) / n;
        const double debiased = hpj_combine(plugin, static_cast<double>(c1) / n, static_cast<double>(c2) / n).value;
        const double oracle = static_cast<double>(ct) / n;
        out[4 * e + 0] = plugin - oracle;
        out[4 * e + 1] = debiased - oracle;
        out[4 * e + 2] = plugin - config.eval_probabilities[e];
        out[4 * e + 3] = debiased - config.eval_probabilities[e];
      }
      const DebiasedScalar v = debiased_variance(triples);
      out[4 * n_eval + 0] = v.plugin;
      out[4 * n_eval + 1] = v.value;
    });

    // Column means and standard errors, accumulated in replication order.
    auto column = [&](std::size_t col, double& mean, double& se) {
      double sum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) sum += per_rep[r * width + col];
      mean = sum / static_cast<double>(reps);
      double ss = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double d = per_rep[r * width + col] - mean;
        ss += d * d;
      }
      se = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps)) : 0.0;
    };
    for (std::size_t e = 0; e < n_eval; ++e) {
      BiasRow row;
      row.point = pt;
      row.probability = config.eval_probabilities[e];
      row.eval_point = eval[e];
      double unused = 0.0;
      column(4 * e + 0, row.plugin_bias, row.plugin_se);
      column(4 * e + 1, row.debiased_bias, row.debiased_se);
      column(4 * e + 2, row.plugin_bias_raw, unused);
      column(4 * e + 3, row.debiased_bias_raw, unused);
      s.bias_rows.push_back(row);
    }
    VarianceRow vr;
    vr.point = pt;
    vr.true_variance = pt.xi == 0.0 ? pt.sigma * pt.sigma * latent.variance() : std::nan("");
    column(4 * n_eval + 0, vr.plugin_mean, vr.plugin_se);
    column(4 * n_eval + 1, vr.debiased_mean, vr.debiased_se);
    s.variance_rows.push_back(vr);
  }

  for (const auto& a : s.bias_rows) {
    for (const auto& b : s.bias_rows) {
      if (b.point.tenure != 2 * a.point.tenure || b.probability != a.probability || b.point.xi != a.point.xi ||
          b.point.firms != a.point.firms || b.point.noise_sd != a.point.noise_sd || b.point.mu != a.point.mu ||
          b.point.sigma != a.point.sigma) {
        continue;
      }
      s.ratios.push_back({a.point.tenure, b.point.tenure, a.probability, a.plugin_bias / b.plugin_bias,
                          a.debiased_bias / b.debiased_bias});
    }
  }
  for (const auto& r : s.ratios) {
    s.report.push_back("bias ratio T=" + std::to_string(r.tenure) + " vs T=" + std::to_string(r.doubled) +
                       " at p=" + fmt("%.3g", r.probability) + ": plugin " + fmt("%.3f", r.plugin_ratio) +
                       ", debiased " + fmt("%.3f", r.debiased_ratio));
  }
  if (fast) s.report.push_back("noise averages drawn from their exact half-panel Normal laws");
  s.wall_clock_seconds = seconds_since(start);
  return s;
}

MonteCarloSummary run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::kSize: return run_size_experiment(config);
    case ExperimentKind::kPower: return run_power_experiment(config);
    case ExperimentKind::kBiasOrder: return bias_order_check(config);
  }
  throw std::invalid_argument("unknown experiment kind");
}

namespace {

std::string point_fields(const GridPoint& p) {
  std::ostringstream os;
  os << csv::format_double(p.xi) << ',' << p.firms << ',' << p.tenure << ',' << csv::format_double(p.noise_sd)
     << ',' << csv::format_double(p.mu) << ',' << csv::format_double(p.sigma);
  return os.str();
}

}  // namespace

std::string summary_csv(const MonteCarloSummary& s) {
  std::ostringstream os;
  if (s.kind == ExperimentKind::kBiasOrder) {
    os << "kind,xi,firms,tenure,noise_sd,mu,sigma,probability,eval_point,plugin_bias,plugin_se,debiased_bias,"
          "debiased_se,plugin_bias_raw,debiased_bias_raw,plugin_variance,debiased_variance\n";
    for (const auto& r : s.bias_rows) {
      const auto vr = std::find_if(s.variance_rows.begin(), s.variance_rows.end(), [&](const VarianceRow& v) {
        return std::tie(v.point.xi, v.point.firms, v.point.tenure, v.point.noise_sd, v.point.mu, v.point.sigma) ==
               std::tie(r.point.xi, r.point.firms, r.point.tenure, r.point.noise_sd, r.point.mu, r.point.sigma);
      });
      os << to_string(s.kind) << ',' << point_fields(r.point) << ',' << csv::format_double(r.probability) << ','
         << csv::format_double(r.eval_point) << ',' << csv::format_double(r.plugin_bias) << ','
         << csv::format_double(r.plugin_se) << ',' << csv::format_double(r.debiased_bias) << ','
         << csv::format_double(r.debiased_se) << ',' << csv::format_double(r.plugin_bias_raw) << ','
         << csv::format_double(r.debiased_bias_raw) << ','
         << (vr != s.variance_rows.end() ? csv::format_double(vr->plugin_mean) : "") << ','
         << (vr != s.variance_rows.end() ? csv::format_double(vr->debiased_mean) : "") << '\n';
    }
    return os.str();
  }
  os << "kind,xi,firms,tenure,noise_sd,mu,sigma,replications,failed,rejections,rejection_rate,mc_se,mean_p_value,"
        "plugin_variance_bias,debiased_variance_bias,degenerate_draws\n";
  for (const auto& r : s.rejection_rows) {
    os << to_string(s.kind) << ',' << point_fields(r.point) << ',' << r.replications << ',' << r.failed << ','
       << r.rejections << ',' << csv::format_double(r.rejection_rate) << ',' << csv::format_double(r.mc_se) << ','
       << csv::format_double(r.mean_p_value) << ',' << csv::format_double(r.plugin_variance_bias) << ','
       << csv::format_double(r.debiased_variance_bias) << ',' << r.degenerate_draws << '\n';
  }
  return os.str();
}

std::string summary_text(const MonteCarloSummary& s) {
  std::ostringstream os;
  char line[256];
  os << "Monte Carlo experiment: " << to_string(s.kind) << "\n\n";
  if (s.kind == ExperimentKind::kBiasOrder) {
    std::snprintf(line, sizeof(line), "%6s %6s %8s %6s %12s %12s %12s %12s\n", "T", "N", "noise", "p", "plugin",
                  "(se)", "debiased", "(se)");
    os << line;
    for (const auto& r : s.bias_rows) {
      std::snprintf(line, sizeof(line), "%6d %6zu %8.3g %6.3g %12.6f %12.6f %12.6f %12.6f\n", r.point.tenure,
                    r.point.firms, r.point.noise_sd, r.probability, r.plugin_bias, r.plugin_se, r.debiased_bias,
                    r.debiased_se);
      os << line;
    }
    os << "\nVariance (plug-in vs debiased):\n";
    for (const auto& v : s.variance_rows) {
      std::snprintf(line, sizeof(line), "  T=%d N=%zu: true %.6f  plugin %.6f (%.6f)  debiased %.6f (%.6f)\n",
                    v.point.tenure, v.point.firms, v.true_variance, v.plugin_mean, v.plugin_se, v.debiased_mean,
                    v.debiased_se);
      os << line;
    }
  } else {
    std::snprintf(line, sizeof(line), "%6s %6s %4s %6s %6s %6s %6s %9s %8s %8s\n", "xi", "N", "T", "noise", "mu",
                  "sigma", "R", "rejected", "rate", "se");
    os << line;
    for (const auto& r : s.rejection_rows) {
      std::snprintf(line, sizeof(line), "%6.3g %6zu %4d %6.3g %6.3g %6.3g %6zu %9zu %8.4f %8.4f\n", r.point.xi,
                    r.point.firms, r.point.tenure, r.point.noise_sd, r.point.mu, r.point.sigma, r.replications,
                    r.rejections, r.rejection_rate, r.mc_se);
      os << line;
    }
  }
  if (!s.report.empty()) {
    os << '\n';
    for (const auto& note : s.report) os << note << '\n';
  }
  return os.str();
}

}  // namespace hpjks
