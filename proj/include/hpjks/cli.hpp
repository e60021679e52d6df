#pragma once

// Subcommand implementations behind the hpjks executable. Each writes its
// outputs under an output directory together with effective_config.json, the
// fully defaulted configuration that reproduces the run.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hpjks/config_io.hpp"
#include "hpjks/dgp.hpp"
#include "hpjks/kstest.hpp"
#include "hpjks/montecarlo.hpp"
#include "hpjks/panel.hpp"

namespace hpjks {

/// Nondeterministic seed for runs that did not supply one.
std::uint64_t fresh_seed();

/// Writes panel.csv, ground_truth.csv and effective_config.json.
void cmd_simulate(const DgpConfig& config, const std::filesystem::path& output_dir, unsigned threads = 1);

struct TestRunConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  ColumnMapping columns;
  CleaningConfig cleaning;  // cleaning.min_tenure is the tenure filter
  std::size_t bootstrap = 999;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sectors;  // empty means all
  unsigned threads = 1;
  double validity_threshold = 1.0;
  bool svg = false;
};

/// The sidecar leaves out `output` and `threads`: neither affects results.
void to_json(Json& j, const TestRunConfig& v);
void from_json(const Json& j, TestRunConfig& v);

struct SectorOutcome {
  std::string sector;
  bool ok = false;
  std::size_t n_amd = 0;
  std::size_t n_bmd = 0;
  std::optional<TestResult> result;
  std::string error;  // set when !ok
};

struct TestRunOutcome {
  std::uint64_t seed = 0;
  CleaningReport cleaning;
  std::vector<SectorOutcome> sectors;  // lexicographic by sector
};

/// Loads, cleans and tests every requested sector. A sector that cannot be
/// tested is flagged in the outputs and the run continues. Writes
/// results.csv, results.txt, cleaning_report.json, production.json,
/// effective_config.json and cdf/<sector>_<area>.csv (plus .svg overlays if
/// requested). Throws only on fatal errors (unreadable input, bad config).
TestRunOutcome cmd_test(const TestRunConfig& config);

/// Runs the experiment and writes summary.csv, summary.txt and
/// effective_config.json.
MonteCarloSummary cmd_montecarlo(const ExperimentConfig& config, const std::filesystem::path& output_dir);

struct ReportRow {
  std::string sector;
  std::optional<double> p_value;  // empty for a sector that was not tested
  std::size_t n_amd = 0;
  std::size_t n_bmd = 0;
};

enum class ReportFormat { kText, kLatex };

/// Reads a results CSV (needs columns sector, p_value, n_amd, n_bmd).
/// Throws DataError for a malformed file.
std::vector<ReportRow> read_results(const std::filesystem::path& path);
std::vector<ReportRow> parse_results(std::string_view csv_text);

/// Aligned table "Sector | p-value | N_AMD | N_BMD" with p-values to three
/// decimals, or LaTeX tabular rows.
std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format = ReportFormat::kText);

std::string cmd_report(const std::filesystem::path& results_csv, ReportFormat format = ReportFormat::kText);

}  // namespace hpjks
