#pragma once

// Firm-year panel data model: CSV ingestion, record cleaning, tenure
// filtering and contiguous half-panel splits.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hpjks {

enum class Area { kAmd, kBmd };

std::string_view to_string(Area area) noexcept;
/// Accepts "AMD"/"BMD" in any letter case.
std::optional<Area> parse_area(std::string_view text) noexcept;

struct PanelObservation {
  std::string firm_id;
  int year = 0;
  std::string sector;
  Area area = Area::kBmd;
  // NaN marks a missing cell.
  double value_added = 0.0;
  double capital = 0.0;
  double labor = 0.0;
  std::optional<double> employees;
  std::optional<std::string> category;

  bool operator==(const PanelObservation&) const = default;
};

struct ParseFailure {
  std::size_t line = 0;  // 1-based line number in the file, header is line 1
  std::string column;
  std::string message;
};

struct PanelDataset {
  std::vector<PanelObservation> observations;
  std::vector<ParseFailure> parse_failures;

  std::size_t size() const noexcept { return observations.size(); }
  bool empty() const noexcept { return observations.empty(); }
};

/// Maps logical fields onto CSV header names.
struct ColumnMapping {
  std::string firm_id = "firm_id";
  std::string year = "year";
  std::string sector = "sector";
  std::string area = "area";
  std::string value_added = "value_added";
  std::string capital = "capital";
  std::string labor = "labor";
  std::optional<std::string> employees;
  std::optional<std::string> category;
};

/// Time-ordered observations of one firm. All observations share firm_id,
/// sector and area.
struct FirmSeries {
  std::string firm_id;
  std::string sector;
  Area area = Area::kBmd;
  std::vector<PanelObservation> observations;

  std::size_t tenure() const noexcept { return observations.size(); }
};

/// Record-level rules, in attribution order. A record that violates several
/// rules is counted under the first one only.
enum class CleaningRule : std::size_t {
  kExcludedSector = 0,
  kCategoryFilter,
  kMissingValue,
  kNonPositive,
  kMaxEmployees,
};
inline constexpr std::size_t kCleaningRuleCount = 5;
std::string_view to_string(CleaningRule rule) noexcept;

struct CleaningConfig {
  int min_tenure = 15;
  bool drop_nonpositive = true;
  std::set<std::string> excluded_sectors;
  std::optional<double> max_employees;
  // Generic include-filter: when set, records whose category value is not in
  // the set are dropped.
  std::optional<std::set<std::string>> include_categories;
  bool require_consecutive_years = false;
};

struct CleaningReport {
  std::size_t input_records = 0;
  std::size_t retained_records = 0;
  std::array<std::size_t, kCleaningRuleCount> dropped{};
  // Firms whose sector or area label was harmonized to the most frequent one.
  std::size_t relabeled_firms = 0;
  std::map<std::pair<std::string, Area>, std::size_t> firms_retained;

  std::size_t dropped_total() const noexcept;
};

/// Reads a header-first, comma-delimited UTF-8 file. Rows whose mapped fields
/// cannot be parsed are recorded in parse_failures and left out; empty numeric
/// cells are kept as NaN so that cleaning can account for them.
/// Throws DataError on a missing file, missing mapped column or a duplicate
/// (firm_id, year) key.
PanelDataset load_panel(const std::filesystem::path& path, const ColumnMapping& schema = {});
PanelDataset parse_panel(std::string_view csv_text, const ColumnMapping& schema = {});

/// Writes observations in the default ColumnMapping layout.
void write_panel(const std::filesystem::path& path, const PanelDataset& dataset);

/// Harmonizes each firm to its most frequent sector and area, then applies the
/// record rules. Never throws on data content.
std::pair<PanelDataset, CleaningReport> clean_panel(const PanelDataset& dataset,
                                                    const CleaningConfig& config);

/// Groups observations into per-firm series sorted by (firm_id), each sorted
/// by year. Throws DataError if a firm spans several sectors or areas.
std::vector<FirmSeries> group_series(const PanelDataset& dataset);

/// Drops whole firms observed fewer than min_tenure times (and, optionally,
/// firms with calendar gaps). Throws std::invalid_argument if min_tenure < 2.
PanelDataset filter_min_periods(const PanelDataset& dataset, int min_tenure,
                                bool require_consecutive_years = false);

/// First half holds floor(T/2) observations, second half the rest.
/// Throws std::invalid_argument if T < 2.
std::pair<FirmSeries, FirmSeries> split_halves(const FirmSeries& series);

/// Length of the first half for a series of tenure T.
constexpr std::size_t first_half_length(std::size_t tenure) noexcept { return tenure / 2; }

}  // namespace hpjks
