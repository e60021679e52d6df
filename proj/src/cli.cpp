#include "hpjks/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "csv_util.hpp"
#include "hpjks/error.hpp"
#include "hpjks/parallel.hpp"
#include "hpjks/prodfn.hpp"
#include "io_util.hpp"

namespace hpjks {

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void cmd_simulate(const DgpConfig& config, const std::filesystem::path& output_dir, unsigned threads) {
  config.validate();
  const SimulatedPanel sim = generate_panel(config, threads);
  std::filesystem::create_directories(output_dir);
  write_panel(output_dir / "panel.csv", sim.dataset);
  write_ground_truth(output_dir / "ground_truth.csv", sim.truth);
  write_json_file(output_dir / "effective_config.json", Json(config));
}

void to_json(Json& j, const TestRunConfig& v) {
  j = Json{{"input", v.input.string()},
           {"columns", v.columns},
           {"cleaning", v.cleaning},
           {"bootstrap", v.bootstrap},
           {"seed", nullptr},
           {"sectors", v.sectors},
           {"validity_threshold", v.validity_threshold},
           {"svg", v.svg}};
  if (v.seed) j["seed"] = *v.seed;
}

void from_json(const Json& j, TestRunConfig& v) {
  if (!j.is_object()) throw std::invalid_argument("test config must be a JSON object");
  static const std::set<std::string> allowed{"input",   "output",  "columns", "cleaning",           "bootstrap",
                                             "seed",    "sectors", "threads", "validity_threshold", "svg"};
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw std::invalid_argument("unknown key '" + key + "' in test config");
  }
  v = TestRunConfig{};
  if (j.contains("input")) v.input = j.at("input").get<std::string>();
  if (j.contains("output")) v.output = j.at("output").get<std::string>();
  if (j.contains("columns")) v.columns = j.at("columns").get<ColumnMapping>();
  if (j.contains("cleaning")) v.cleaning = j.at("cleaning").get<CleaningConfig>();
  if (j.contains("bootstrap")) v.bootstrap = j.at("bootstrap").get<std::size_t>();
  if (j.contains("seed") && !j.at("seed").is_null()) v.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("sectors")) v.sectors = j.at("sectors").get<std::vector<std::string>>();
  if (j.contains("threads")) v.threads = j.at("threads").get<unsigned>();
  if (j.contains("validity_threshold")) v.validity_threshold = j.at("validity_threshold").get<double>();
  if (j.contains("svg")) v.svg = j.at("svg").get<bool>();
}

namespace {

// FNV-1a, so a sector's bootstrap stream depends on its name and not on
// which other sectors happen to be in the run.
std::uint64_t sector_key(const std::string& sector) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : sector) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string file_stem(const std::string& sector) {
  std::string out;
  for (char c : sector) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '_' || c == '.';
    out.push_back(keep ? c : '_');
  }
  return out.empty() ? "_" : out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

struct Overlay {
  std::vector<double> z;
  std::vector<double> value;
};

/// Standardized debiased CDF at each of the cell's jump points.
Overlay overlay_of(const CellSummary& s) {
  Overlay o;
  const auto& x = s.cdf.jump_points();
  o.z.reserve(x.size());
  for (double xi : x) o.z.push_back((xi - s.mean.value) / s.sd);
  o.value = s.cdf.values();
  return o;
}

std::string overlay_csv(const Overlay& o) {
  std::ostringstream os;
  os << "z,value\n";
  for (std::size_t i = 0; i < o.z.size(); ++i) {
    os << csv::format_double(o.z[i]) << ',' << csv::format_double(o.value[i]) << '\n';
  }
  return os.str();
}

std::string svg_overlay(const std::string& sector, const Overlay& amd, const Overlay& bmd) {
  double zlo = -3.0, zhi = 3.0, ylo = 0.0, yhi = 1.0;
  for (const Overlay* o : {&amd, &bmd}) {
    for (double v : o->value) {
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  }
  const double w = 640, h = 400, m = 40;
  auto px = [&](double z) { return m + (std::clamp(z, zlo, zhi) - zlo) / (zhi - zlo) * (w - 2 * m); };
  auto py = [&](double y) { return h - m - (y - ylo) / (yhi - ylo) * (h - 2 * m); };
  char buf[128];
  auto path = [&](const Overlay& o) {
    std::string d;
    double prev = 0.0;
    std::snprintf(buf, sizeof(buf), "M%.2f,%.2f", px(zlo), py(0.0));
    d += buf;
    for (std::size_t i = 0; i < o.z.size(); ++i) {
      if (o.z[i] < zlo || o.z[i] > zhi) {
        prev = o.value[i];
        continue;
      }
      std::snprintf(buf, sizeof(buf), " H%.2f V%.2f", px(o.z[i]), py(o.value[i]));
      d += buf;
      prev = o.value[i];
    }
    std::snprintf(buf, sizeof(buf), " H%.2f", px(zhi));
    d += buf;
    (void)prev;
    return d;
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf), "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#999\"/>\n", px(zlo),
                py(0.0), px(zhi), py(0.0));
  os << buf;
  std::snprintf(buf, sizeof(buf), "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#999\"/>\n", px(zlo),
                py(1.0), px(zhi), py(1.0));
  os << buf;
  os << "<path d=\"" << path(amd) << "\" fill=\"none\" stroke=\"#c0392b\"/>\n";
  os << "<path d=\"" << path(bmd) << "\" fill=\"none\" stroke=\"#2c3e50\" stroke-dasharray=\"4 3\"/>\n";
  os << "<text x=\"" << m << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << sector
     << ": standardized debiased CDF, AMD (solid) vs BMD (dashed)</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string results_csv(const std::vector<SectorOutcome>& sectors) {
  std::ostringstream os;
  os << "sector,p_value,n_amd,n_bmd,statistic,validity_ratio,t_min,completed_draws,degenerate_draws,status,"
        "warnings\n";
  for (const auto& s : sectors) {
    os << csv::quote(s.sector) << ',';
    if (s.ok) {
      const auto& r = *s.result;
      os << csv::format_double(r.p_value) << ',' << s.n_amd << ',' << s.n_bmd << ','
         << csv::format_double(r.statistic) << ',' << csv::format_double(r.validity_ratio) << ',' << r.t_min << ','
         << r.completed_draws << ',' << r.degenerate_draws << ",ok," << csv::quote(join(r.warnings, "; "));
    } else {
      os << ',' << s.n_amd << ',' << s.n_bmd << ",,,,,,error," << csv::quote(s.error);
    }
    os << '\n';
  }
  return os.str();
}

std::string results_text(const TestRunOutcome& run) {
  std::vector<ReportRow> rows;
  for (const auto& s : run.sectors) {
    rows.push_back({s.sector, s.ok ? std::optional<double>(s.result->p_value) : std::nullopt, s.n_amd, s.n_bmd});
  }
  std::ostringstream os;
  os << "Bootstrap p-values and sample sizes (seed " << run.seed << ")\n\n" << render_report(rows) << '\n';
  for (const auto& s : run.sectors) {
    if (!s.ok) {
      os << s.sector << ": NOT TESTED: " << s.error << '\n';
      continue;
    }
    const auto& r = *s.result;
    os << s.sector << ": statistic " << csv::format_double(r.statistic) << ", validity ratio "
       << csv::format_double(r.validity_ratio) << " (T_min " << r.t_min << "), " << r.completed_draws << " of "
       << r.n_bootstrap << " draws used\n";
    for (const auto& w : r.warnings) os << "  warning: " << w << '\n';
  }
  return os.str();
}

}  // namespace

TestRunOutcome cmd_test(const TestRunConfig& config) {
  if (config.bootstrap < 1) throw std::invalid_argument("bootstrap must be at least 1");
  if (config.cleaning.min_tenure < 2) throw std::invalid_argument("min_tenure must be at least 2");
  if (config.output.empty()) throw std::invalid_argument("an output directory is required");

  TestRunOutcome run;
  run.seed = config.seed ? *config.seed : fresh_seed();

  const PanelDataset raw = load_panel(config.input, config.columns);
  auto [cleaned, report] = clean_panel(raw, config.cleaning);
  run.cleaning = report;

  std::set<std::string> present;
  for (const auto& o : cleaned.observations) present.insert(o.sector);
  std::set<std::string> wanted;
  if (config.sectors.empty()) {
    wanted = present;
  } else {
    wanted.insert(config.sectors.begin(), config.sectors.end());
  }

  PanelDataset selected;
  for (const auto& o : cleaned.observations) {
    if (wanted.count(o.sector)) selected.observations.push_back(o);
  }
  std::map<std::string, std::string> errors;
  const auto cells = estimate_cells(selected, config.cleaning.min_tenure, config.cleaning.require_consecutive_years,
                                    LeastSquaresEstimator{}, &errors);
  // Tenured firm counts, known even when estimation fails.
  std::map<std::pair<std::string, Area>, std::size_t> counts;
  for (const auto& f : group_series(filter_min_periods(selected, config.cleaning.min_tenure,
                                                       config.cleaning.require_consecutive_years))) {
    ++counts[{f.sector, f.area}];
  }

  std::vector<std::string> sector_names(wanted.begin(), wanted.end());
  run.sectors.resize(sector_names.size());
  std::vector<std::optional<std::pair<Overlay, Overlay>>> overlays(sector_names.size());

  const unsigned threads = std::max(1u, config.threads);
  const bool across_sectors = sector_names.size() > 1 && threads > 1;
  parallel_for(sector_names.size(), across_sectors ? threads : 1, [&](std::size_t k) {
    const std::string& name = sector_names[k];
    SectorOutcome& out = run.sectors[k];
    out.sector = name;
    const CellEstimates* amd = nullptr;
    const CellEstimates* bmd = nullptr;
    for (const auto& c : cells) {
      if (c.sector == name) (c.area == Area::kAmd ? amd : bmd) = &c;
    }
    if (auto it = counts.find({name, Area::kAmd}); it != counts.end()) out.n_amd = it->second;
    if (auto it = counts.find({name, Area::kBmd}); it != counts.end()) out.n_bmd = it->second;
    if (!present.count(name)) {
      out.error = "sector not present after cleaning";
      return;
    }
    if (out.n_amd < 2 || out.n_bmd < 2) {
      out.error = "needs at least 2 firms per area after filtering (AMD " + std::to_string(out.n_amd) + ", BMD " +
                  std::to_string(out.n_bmd) + ")";
      return;
    }
    if (auto it = errors.find(name); it != errors.end()) {
      out.error = "estimation failed: " + it->second;
      return;
    }
    if (!amd || !bmd) {
      out.error = "no estimates for one of the areas";
      return;
    }
    try {
      BootstrapOptions opts;
      opts.replications = config.bootstrap;
      opts.seed = derive_seed(run.seed, {sector_key(name)});
      opts.threads = across_sectors ? 1 : threads;
      opts.validity_threshold = config.validity_threshold;
      out.result = bootstrap_test(amd->triples, bmd->triples, opts);
      out.ok = true;
      overlays[k].emplace(overlay_of(summarize_cell(amd->triples)), overlay_of(summarize_cell(bmd->triples)));
    } catch (const std::exception& e) {
      out.ok = false;
      out.result.reset();
      out.error = e.what();
    }
  });

  const auto& dir = config.output;
  std::filesystem::create_directories(dir / "cdf");
  for (std::size_t k = 0; k < sector_names.size(); ++k) {
    if (!overlays[k]) continue;
    const std::string stem = file_stem(sector_names[k]);
    io::write_file_atomic(dir / "cdf" / (stem + "_AMD.csv"), overlay_csv(overlays[k]->first));
    io::write_file_atomic(dir / "cdf" / (stem + "_BMD.csv"), overlay_csv(overlays[k]->second));
    if (config.svg) {
      io::write_file_atomic(dir / "cdf" / (stem + ".svg"),
                            svg_overlay(sector_names[k], overlays[k]->first, overlays[k]->second));
    }
  }

  Json production = Json::array();
  for (const auto& c : cells) production.push_back(Json(c.production));
  write_json_file(dir / "production.json", production);
  write_json_file(dir / "cleaning_report.json", Json(run.cleaning));

  TestRunConfig effective = config;
  effective.seed = run.seed;
  write_json_file(dir / "effective_config.json", Json(effective));

  io::write_file_atomic(dir / "results.csv", results_csv(run.sectors));
  io::write_file_atomic(dir / "results.txt", results_text(run));
  return run;
}

MonteCarloSummary cmd_montecarlo(const ExperimentConfig& config, const std::filesystem::path& output_dir) {
  MonteCarloSummary s = run_experiment(config);
  std::filesystem::create_directories(output_dir);
  io::write_file_atomic(output_dir / "summary.csv", summary_csv(s));
  io::write_file_atomic(output_dir / "summary.txt", summary_text(s));
  write_json_file(output_dir / "effective_config.json", Json(config));
  return s;
}

std::vector<ReportRow> parse_results(std::string_view text) {
  text = csv::strip_bom(text);
  const auto lines = csv::split_lines(text);
  std::vector<ReportRow> rows;
  if (lines.empty() || csv::trim(lines.front()).empty()) return rows;

  const auto header = csv::split_line(lines.front());
  auto column = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(std::string("results file lacks column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_sector = column("sector"), c_p = column("p_value"), c_a = column("n_amd"),
                    c_b = column("n_bmd");

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    const auto f = csv::split_line(lines[i]);
    const std::string where = "results line " + std::to_string(i + 1);
    if (f.size() != header.size()) throw DataError(where + ": expected " + std::to_string(header.size()) + " fields");
    ReportRow row;
    row.sector = f[c_sector];
    if (row.sector.empty()) throw DataError(where + ": empty sector");
    if (!f[c_p].empty()) {
      const auto p = csv::parse_double(f[c_p]);
      if (!p || *p < 0.0 || *p > 1.0) throw DataError(where + ": p_value is not a probability");
      row.p_value = *p;
    }
    const auto na = csv::parse_int(f[c_a]);
    const auto nb = csv::parse_int(f[c_b]);
    if (!na || !nb || *na < 0 || *nb < 0) throw DataError(where + ": firm counts must be non-negative integers");
    row.n_amd = static_cast<std::size_t>(*na);
    row.n_bmd = static_cast<std::size_t>(*nb);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ReportRow> read_results(const std::filesystem::path& path) { return parse_results(io::read_file(path)); }

std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format) {
  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({"Sector", "p-value", "N_AMD", "N_BMD"});
  for (const auto& r : rows) {
    cells.push_back({r.sector, r.p_value ? fmt3(*r.p_value) : "NA", std::to_string(r.n_amd), std::to_string(r.n_bmd)});
  }
  std::ostringstream os;
  if (format == ReportFormat::kLatex) {
    os << "\\begin{tabular}{|l|c|c|c|}\n\\hline\n";
    for (const auto& c : cells) os << c[0] << " & " << c[1] << " & " << c[2] << " & " << c[3] << " \\\\ \\hline\n";
    os << "\\end{tabular}\n";
    return os.str();
  }
  std::array<std::size_t, 4> width{};
  for (const auto& c : cells) {
    for (std::size_t k = 0; k < 4; ++k) width[k] = std::max(width[k], c[k].size());
  }
  auto pad = [](const std::string& s, std::size_t w, bool left) {
    const std::string fill(w - s.size(), ' ');
    return left ? s + fill : fill + s;
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    os << pad(c[0], width[0], true) << " | " << pad(c[1], width[1], false) << " | " << pad(c[2], width[2], false)
       << " | " << pad(c[3], width[3], false) << '\n';
    if (i == 0) {
      os << std::string(width[0], '-') << "-+-" << std::string(width[1], '-') << "-+-" << std::string(width[2], '-')
         << "-+-" << std::string(width[3], '-') << '\n';
    }
  }
  return os.str();
}

std::string cmd_report(const std::filesystem::path& results_csv_path, ReportFormat format) {
  return render_report(read_results(results_csv_path), format);
}

}  // namespace hpjks
