#include "hpjks/panel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "csv_util.hpp"
#include "hpjks/error.hpp"
#include "io_util.hpp"

namespace hpjks {

std::string_view to_string(Area area) noexcept { return area == Area::kAmd ? "AMD" : "BMD"; }

std::optional<Area> parse_area(std::string_view text) noexcept {
  text = csv::trim(text);
  if (text.size() != 3) return std::nullopt;
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "AMD") return Area::kAmd;
  if (upper == "BMD") return Area::kBmd;
  return std::nullopt;
}

std::string_view to_string(CleaningRule rule) noexcept {
  switch (rule) {
    case CleaningRule::kExcludedSector: return "excluded_sector";
    case CleaningRule::kCategoryFilter: return "category_filter";
    case CleaningRule::kMissingValue: return "missing_value";
    case CleaningRule::kNonPositive: return "nonpositive_value";
    case CleaningRule::kMaxEmployees: return "max_employees";
  }
  return "unknown";
}

std::size_t CleaningReport::dropped_total() const noexcept {
  std::size_t total = 0;
  for (auto d : dropped) total += d;
  return total;
}

namespace {

struct FirmYearHash {
  std::size_t operator()(const std::pair<std::string, int>& key) const noexcept {
    return std::hash<std::string>{}(key.first) ^ (std::hash<int>{}(key.second) * 0x9e3779b97f4a7c15ULL);
  }
};

std::size_t require_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("mapped column not found in header: '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

PanelDataset parse_panel(std::string_view csv_text, const ColumnMapping& schema) {
  const auto lines = csv::split_lines(csv::strip_bom(csv_text));
  if (lines.empty() || csv::trim(lines.front()).empty()) throw DataError("CSV input has no header row");
  const auto header = csv::split_line(lines.front());

  const std::size_t c_firm = require_column(header, schema.firm_id);
  const std::size_t c_year = require_column(header, schema.year);
  const std::size_t c_sector = require_column(header, schema.sector);
  const std::size_t c_area = require_column(header, schema.area);
  const std::size_t c_v = require_column(header, schema.value_added);
  const std::size_t c_k = require_column(header, schema.capital);
  const std::size_t c_l = require_column(header, schema.labor);
  std::optional<std::size_t> c_emp, c_cat;
  if (schema.employees) c_emp = require_column(header, *schema.employees);
  if (schema.category) c_cat = require_column(header, *schema.category);

  PanelDataset out;
  std::unordered_set<std::pair<std::string, int>, FirmYearHash> seen;
  constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (csv::trim(lines[li]).empty()) continue;
    const std::size_t line_no = li + 1;
    const auto fields = csv::split_line(lines[li]);
    if (fields.size() != header.size()) {
      out.parse_failures.push_back({line_no, "", "expected " + std::to_string(header.size()) +
                                                     " fields, found " + std::to_string(fields.size())});
      continue;
    }
    auto fail = [&](const std::string& column, const std::string& what) {
      out.parse_failures.push_back({line_no, column, what});
    };

    PanelObservation obs;
    obs.firm_id = fields[c_firm];
    if (obs.firm_id.empty()) {
      fail(schema.firm_id, "empty firm identifier");
      continue;
    }
    const auto year = csv::parse_int(fields[c_year]);
    if (!year || *year < std::numeric_limits<int>::min() || *year > std::numeric_limits<int>::max()) {
      fail(schema.year, "not an integer year: '" + fields[c_year] + "'");
      continue;
    }
    obs.year = static_cast<int>(*year);
    obs.sector = fields[c_sector];
    const auto area = parse_area(fields[c_area]);
    if (!area) {
      fail(schema.area, "area must be AMD or BMD: '" + fields[c_area] + "'");
      continue;
    }
    obs.area = *area;

    // Empty numeric cells are missing values (NaN), anything else that does
    // not parse is a record failure.
    bool ok = true;
    auto numeric = [&](std::size_t col, const std::string& name) {
      if (csv::trim(fields[col]).empty()) return kMissing;
      const auto v = csv::parse_double(fields[col]);
      if (!v) {
        fail(name, "not a number: '" + fields[col] + "'");
        ok = false;
        return kMissing;
      }
      return *v;
    };
    obs.value_added = numeric(c_v, schema.value_added);
    if (ok) obs.capital = numeric(c_k, schema.capital);
    if (ok) obs.labor = numeric(c_l, schema.labor);
    if (ok && c_emp && !csv::trim(fields[*c_emp]).empty()) obs.employees = numeric(*c_emp, *schema.employees);
    if (!ok) continue;
    if (c_cat) obs.category = fields[*c_cat];

    if (!seen.emplace(obs.firm_id, obs.year).second) {
      throw DataError("duplicate (firm_id, year) = (" + obs.firm_id + ", " + std::to_string(obs.year) +
                      ") at line " + std::to_string(line_no));
    }
    out.observations.push_back(std::move(obs));
  }
  return out;
}

PanelDataset load_panel(const std::filesystem::path& path, const ColumnMapping& schema) {
  if (!std::filesystem::exists(path)) throw DataError("panel file does not exist: " + path.string());
  return parse_panel(io::read_file(path), schema);
}

void write_panel(const std::filesystem::path& path, const PanelDataset& dataset) {
  std::ostringstream out;
  out << "firm_id,year,sector,area,value_added,capital,labor\n";
  for (const auto& o : dataset.observations) {
    out << csv::quote(o.firm_id) << ',' << o.year << ',' << csv::quote(o.sector) << ',' << to_string(o.area)
        << ',' << csv::format_double(o.value_added) << ',' << csv::format_double(o.capital) << ','
        << csv::format_double(o.labor) << '\n';
  }
  io::write_file_atomic(path, out.str());
}

namespace {

template <typename Key>
Key most_frequent(const std::map<Key, std::size_t>& counts) {
  // Ties resolve to the smallest key because std::map iterates in order and
  // only a strictly larger count replaces the incumbent.
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

std::optional<CleaningRule> first_violation(const PanelObservation& o, const CleaningConfig& config) {
  if (config.excluded_sectors.count(o.sector)) return CleaningRule::kExcludedSector;
  if (config.include_categories && (!o.category || !config.include_categories->count(*o.category))) {
    return CleaningRule::kCategoryFilter;
  }
  if (std::isnan(o.value_added) || std::isnan(o.capital) || std::isnan(o.labor)) {
    return CleaningRule::kMissingValue;
  }
  if (config.drop_nonpositive && (o.value_added <= 0.0 || o.capital <= 0.0 || o.labor <= 0.0)) {
    return CleaningRule::kNonPositive;
  }
  if (config.max_employees && o.employees && *o.employees > *config.max_employees) {
    return CleaningRule::kMaxEmployees;
  }
  return std::nullopt;
}

}  // namespace

std::pair<PanelDataset, CleaningReport> clean_panel(const PanelDataset& dataset, const CleaningConfig& config) {
  CleaningReport report;
  report.input_records = dataset.size();

  std::unordered_map<std::string, std::map<std::string, std::size_t>> sector_counts;
  std::unordered_map<std::string, std::map<Area, std::size_t>> area_counts;
  for (const auto& o : dataset.observations) {
    ++sector_counts[o.firm_id][o.sector];
    ++area_counts[o.firm_id][o.area];
  }
  std::unordered_map<std::string, std::pair<std::string, Area>> label;
  for (const auto& [firm, counts] : sector_counts) {
    const auto& areas = area_counts[firm];
    label[firm] = {most_frequent(counts), most_frequent(areas)};
    if (counts.size() > 1 || areas.size() > 1) ++report.relabeled_firms;
  }

  PanelDataset out;
  out.parse_failures = dataset.parse_failures;
  out.observations.reserve(dataset.size());
  for (const auto& original : dataset.observations) {
    PanelObservation o = original;
    const auto& [sector, area] = label[o.firm_id];
    o.sector = sector;
    o.area = area;
    if (auto rule = first_violation(o, config)) {
      ++report.dropped[static_cast<std::size_t>(*rule)];
      continue;
    }
    out.observations.push_back(std::move(o));
  }
  report.retained_records = out.size();

  std::set<std::string> counted;
  for (const auto& o : out.observations) {
    if (counted.insert(o.firm_id).second) ++report.firms_retained[{o.sector, o.area}];
  }
  return {std::move(out), std::move(report)};
}

std::vector<FirmSeries> group_series(const PanelDataset& dataset) {
  std::map<std::string, FirmSeries> by_firm;
  for (const auto& o : dataset.observations) {
    auto [it, inserted] = by_firm.try_emplace(o.firm_id);
    FirmSeries& s = it->second;
    if (inserted) {
      s.firm_id = o.firm_id;
      s.sector = o.sector;
      s.area = o.area;
    } else if (s.sector != o.sector || s.area != o.area) {
      throw DataError("firm '" + o.firm_id + "' spans several sectors or areas; clean the panel first");
    }
    s.observations.push_back(o);
  }
  std::vector<FirmSeries> out;
  out.reserve(by_firm.size());
  for (auto& [id, s] : by_firm) {
    std::stable_sort(s.observations.begin(), s.observations.end(),
                     [](const PanelObservation& a, const PanelObservation& b) { return a.year < b.year; });
    for (std::size_t t = 1; t < s.observations.size(); ++t) {
      if (s.observations[t].year == s.observations[t - 1].year) {
        throw DataError("duplicate (firm_id, year) = (" + id + ", " + std::to_string(s.observations[t].year) + ")");
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

PanelDataset filter_min_periods(const PanelDataset& dataset, int min_tenure, bool require_consecutive_years) {
  if (min_tenure < 2) throw std::invalid_argument("min_tenure must be at least 2");

  std::unordered_map<std::string, std::vector<int>> years;
  for (const auto& o : dataset.observations) years[o.firm_id].push_back(o.year);

  std::unordered_set<std::string> keep;
  for (auto& [firm, ys] : years) {
    if (ys.size() < static_cast<std::size_t>(min_tenure)) continue;
    if (require_consecutive_years) {
      std::sort(ys.begin(), ys.end());
      if (ys.back() - ys.front() + 1 != static_cast<int>(ys.size())) continue;
    }
    keep.insert(firm);
  }

  PanelDataset out;
  out.parse_failures = dataset.parse_failures;
  for (const auto& o : dataset.observations) {
    if (keep.count(o.firm_id)) out.observations.push_back(o);
  }
  return out;
}

std::pair<FirmSeries, FirmSeries> split_halves(const FirmSeries& series) {
  const std::size_t t = series.tenure();
  if (t < 2) throw std::invalid_argument("split_halves requires at least two observations");
  const auto mid = series.observations.begin() + static_cast<std::ptrdiff_t>(first_half_length(t));
  FirmSeries first{series.firm_id, series.sector, series.area, {series.observations.begin(), mid}};
  FirmSeries second{series.firm_id, series.sector, series.area, {mid, series.observations.end()}};
  return {std::move(first), std::move(second)};
}

}  // namespace hpjks
