#include <cmath>
#include <numeric>
#include <string>

#include "doctest.h"
#include "hpjks/error.hpp"
#include "hpjks/panel.hpp"

using namespace hpjks;

namespace {

const char* kHeader = "firm_id,year,sector,area,value_added,capital,labor\n";

PanelObservation obs(const std::string& firm, int year, const std::string& sector = "S1", Area area = Area::kBmd,
                     double v = 10.0, double k = 5.0, double l = 2.0) {
  PanelObservation o;
  o.firm_id = firm;
  o.year = year;
  o.sector = sector;
  o.area = area;
  o.value_added = v;
  o.capital = k;
  o.labor = l;
  return o;
}

PanelDataset firm_with_tenure(const std::string& firm, int tenure) {
  PanelDataset d;
  for (int t = 0; t < tenure; ++t) d.observations.push_back(obs(firm, 2000 + t));
  return d;
}

void append(PanelDataset& into, const PanelDataset& from) {
  into.observations.insert(into.observations.end(), from.observations.begin(), from.observations.end());
}

}  // namespace

TEST_CASE("parse_panel reads well-formed rows") {
  const std::string text = std::string(kHeader) +
                           "F1,2000,S1,AMD,10,5,2\n"
                           "F1,2001,S1,AMD,11,5.5,2.5\n"
                           "F2,2000,S2,bmd,3e1,1,1\n";
  const auto d = parse_panel(text);
  REQUIRE(d.size() == 3);
  CHECK(d.parse_failures.empty());
  CHECK(d.observations[0].area == Area::kAmd);
  CHECK(d.observations[2].area == Area::kBmd);
  CHECK(d.observations[2].value_added == 30.0);
  CHECK(d.observations[1].capital == 5.5);
}

TEST_CASE("non-numeric capital is recorded as a parse failure") {
  const std::string text = std::string(kHeader) +
                           "F1,2000,S1,AMD,10,5,2\n"
                           "F1,2001,S1,AMD,10,abc,2\n"
                           "F1,2002,S1,AMD,10,5,2\n";
  const auto d = parse_panel(text);
  CHECK(d.size() == 2);
  REQUIRE(d.parse_failures.size() == 1);
  CHECK(d.parse_failures[0].line == 3);
  CHECK(d.parse_failures[0].column == "capital");
}

TEST_CASE("header only gives an empty dataset") {
  const auto d = parse_panel(kHeader);
  CHECK(d.empty());
  CHECK(d.parse_failures.empty());
}

TEST_CASE("load errors") {
  CHECK_THROWS_AS(load_panel("/nonexistent/panel.csv"), DataError);
  CHECK_THROWS_AS(parse_panel("firm_id,year,sector,area,value_added,capital\n"), DataError);
  CHECK_THROWS_AS(parse_panel(std::string(kHeader) + "F1,2000,S1,AMD,1,1,1\nF1,2000,S1,AMD,2,2,2\n"), DataError);
}

TEST_CASE("column mapping, quoting, BOM and CRLF") {
  ColumnMapping m;
  m.firm_id = "id";
  m.year = "yr";
  m.value_added = "va";
  m.employees = "emp";
  const std::string text =
      "\xEF\xBB\xBFid,yr,sector,area,va,capital,labor,emp\r\n"
      "\"F,1\",2000,\"Food, drink\",AMD,10,5,2,40\r\n"
      "F2,2000,S2,BMD,10,5,2,\r\n";
  const auto d = parse_panel(text, m);
  REQUIRE(d.size() == 2);
  CHECK(d.observations[0].firm_id == "F,1");
  CHECK(d.observations[0].sector == "Food, drink");
  CHECK(d.observations[0].employees == doctest::Approx(40.0));
  CHECK_FALSE(d.observations[1].employees.has_value());
}

TEST_CASE("empty numeric cell is kept as missing and dropped by cleaning") {
  const auto d = parse_panel(std::string(kHeader) + "F1,2000,S1,AMD,,5,2\n");
  REQUIRE(d.size() == 1);
  CHECK(std::isnan(d.observations[0].value_added));
  const auto [clean, report] = clean_panel(d, {});
  CHECK(clean.empty());
  CHECK(report.dropped[static_cast<std::size_t>(CleaningRule::kMissingValue)] == 1);
}

TEST_CASE("capital = -5 is dropped under drop_nonpositive") {
  PanelDataset d;
  d.observations.push_back(obs("F1", 2000, "S1", Area::kAmd, 10, -5, 2));
  d.observations.push_back(obs("F1", 2001));
  const auto [clean, report] = clean_panel(d, {});
  CHECK(clean.size() == 1);
  CHECK(report.dropped[static_cast<std::size_t>(CleaningRule::kNonPositive)] == 1);

  CleaningConfig keep;
  keep.drop_nonpositive = false;
  CHECK(clean_panel(d, keep).first.size() == 2);
}

TEST_CASE("clean dataset is a fixed point") {
  PanelDataset d = firm_with_tenure("F1", 4);
  append(d, firm_with_tenure("F2", 3));
  const auto [clean, report] = clean_panel(d, {});
  CHECK(clean.observations == d.observations);
  CHECK(report.dropped_total() == 0);
  CHECK(report.relabeled_firms == 0);
  CHECK(report.retained_records == 7);
}

TEST_CASE("ten-record fixture with four distinct violations") {
  // Hand enumeration: row 2 excluded sector, row 4 missing labor, row 6
  // negative value added, row 8 too many employees; the other six are clean.
  PanelDataset d;
  for (int t = 0; t < 10; ++t) {
    auto o = obs(t < 2 ? "X" + std::to_string(t) : "F" + std::to_string(t), 2000, t == 1 ? "S9" : "S1");
    o.employees = 10.0;
    d.observations.push_back(o);
  }
  d.observations[3].labor = std::nan("");
  d.observations[5].value_added = -1.0;
  d.observations[7].employees = 500.0;

  CleaningConfig c;
  c.excluded_sectors = {"S9"};
  c.max_employees = 250.0;
  const auto [clean, report] = clean_panel(d, c);
  CHECK(clean.size() == 6);
  CHECK(report.dropped_total() == 4);
  CHECK(report.dropped[static_cast<std::size_t>(CleaningRule::kExcludedSector)] == 1);
  CHECK(report.dropped[static_cast<std::size_t>(CleaningRule::kMissingValue)] == 1);
  CHECK(report.dropped[static_cast<std::size_t>(CleaningRule::kNonPositive)] == 1);
  CHECK(report.dropped[static_cast<std::size_t>(CleaningRule::kMaxEmployees)] == 1);
  CHECK(report.input_records == report.retained_records + report.dropped_total());
}

TEST_CASE("multiple violations are attributed to the first rule") {
  PanelDataset d;
  auto o = obs("F1", 2000, "S9", Area::kAmd, -1.0, std::nan(""), 1.0);
  d.observations.push_back(o);
  CleaningConfig c;
  c.excluded_sectors = {"S9"};
  const auto report = clean_panel(d, c).second;
  CHECK(report.dropped[static_cast<std::size_t>(CleaningRule::kExcludedSector)] == 1);
  CHECK(report.dropped_total() == 1);
}

TEST_CASE("category include filter") {
  PanelDataset d;
  auto a = obs("F1", 2000);
  a.category = "SA";
  auto b = obs("F2", 2000);
  b.category = "OTHER";
  auto c = obs("F3", 2000);
  d.observations = {a, b, c};
  CleaningConfig cfg;
  cfg.include_categories = std::set<std::string>{"SA"};
  const auto [clean, report] = clean_panel(d, cfg);
  REQUIRE(clean.size() == 1);
  CHECK(clean.observations[0].firm_id == "F1");
  CHECK(report.dropped[static_cast<std::size_t>(CleaningRule::kCategoryFilter)] == 2);
}

TEST_CASE("most frequent sector and area are applied to every year") {
  PanelDataset d;
  d.observations = {obs("F1", 2000, "S2"), obs("F1", 2001, "S1"), obs("F1", 2002, "S1"),
                    obs("F2", 2000, "S3", Area::kAmd), obs("F2", 2001, "S2", Area::kAmd)};
  const auto [clean, report] = clean_panel(d, {});
  CHECK(report.relabeled_firms == 2);
  for (const auto& o : clean.observations) {
    if (o.firm_id == "F1") CHECK(o.sector == "S1");
    // Tie between S2 and S3 goes to the smaller code.
    if (o.firm_id == "F2") CHECK(o.sector == "S2");
  }
  CHECK(report.firms_retained.at({"S1", Area::kBmd}) == 1);
  CHECK(report.firms_retained.at({"S2", Area::kAmd}) == 1);
  CHECK_NOTHROW(group_series(clean));
  CHECK_THROWS_AS(group_series(d), DataError);
}

TEST_CASE("cleaning is idempotent") {
  PanelDataset d;
  d.observations = {obs("F1", 2000, "S2"), obs("F1", 2001, "S1", Area::kAmd, 1, -1, 1), obs("F1", 2002, "S1"),
                    obs("F2", 2000, "S3", Area::kAmd, std::nan(""), 1, 1), obs("F2", 2001, "S3", Area::kAmd)};
  CleaningConfig c;
  c.excluded_sectors = {"S2"};
  const auto once = clean_panel(d, c).first;
  const auto twice = clean_panel(once, c).first;
  CHECK(once.observations == twice.observations);
}

TEST_CASE("tenure filter drops whole firms") {
  PanelDataset d = firm_with_tenure("F15", 15);
  append(d, firm_with_tenure("F14", 14));
  const auto kept = filter_min_periods(d, 15);
  CHECK(kept.size() == 15);
  for (const auto& o : kept.observations) CHECK(o.firm_id == "F15");
  CHECK_THROWS_AS(filter_min_periods(d, 1), std::invalid_argument);
}

TEST_CASE("tenure filter at threshold 2") {
  PanelDataset d = firm_with_tenure("T1", 1);
  append(d, firm_with_tenure("T2", 2));
  append(d, firm_with_tenure("T3", 3));
  const auto series = group_series(filter_min_periods(d, 2));
  REQUIRE(series.size() == 2);
  CHECK(series[0].firm_id == "T2");
  CHECK(series[1].firm_id == "T3");
}

TEST_CASE("require_consecutive_years drops gapped firms") {
  PanelDataset d;
  d.observations = {obs("G", 2000), obs("G", 2002), obs("G", 2003), obs("C", 2000), obs("C", 2001), obs("C", 2002)};
  CHECK(filter_min_periods(d, 3).size() == 6);
  const auto strict = filter_min_periods(d, 3, true);
  CHECK(strict.size() == 3);
  CHECK(strict.observations[0].firm_id == "C");
}

TEST_CASE("filter preserves order and values") {
  PanelDataset d;
  d.observations = {obs("A", 2003, "S1", Area::kBmd, 1, 2, 3), obs("B", 2000), obs("A", 2001, "S1", Area::kBmd, 4, 5, 6),
                    obs("A", 2002)};
  const auto kept = filter_min_periods(d, 3);
  REQUIRE(kept.size() == 3);
  CHECK(kept.observations[0] == d.observations[0]);
  CHECK(kept.observations[1] == d.observations[2]);
  CHECK(kept.observations[2] == d.observations[3]);
}

TEST_CASE("group_series sorts by year") {
  PanelDataset d;
  d.observations = {obs("A", 2003), obs("A", 2001), obs("A", 2002)};
  const auto s = group_series(d);
  REQUIRE(s.size() == 1);
  CHECK(s[0].observations[0].year == 2001);
  CHECK(s[0].observations[2].year == 2003);
}

TEST_CASE("split_halves lengths") {
  for (auto [t, first] : {std::pair{16, 8}, std::pair{15, 7}, std::pair{2, 1}, std::pair{3, 1}}) {
    const auto series = group_series(firm_with_tenure("F", t)).front();
    const auto [h1, h2] = split_halves(series);
    CHECK(h1.tenure() == static_cast<std::size_t>(first));
    CHECK(h2.tenure() == static_cast<std::size_t>(t - first));
    std::vector<PanelObservation> joined = h1.observations;
    joined.insert(joined.end(), h2.observations.begin(), h2.observations.end());
    CHECK(joined == series.observations);
  }
  CHECK_THROWS_AS(split_halves(group_series(firm_with_tenure("F", 1)).front()), std::invalid_argument);
}

TEST_CASE("write and reload round-trips exactly") {
  PanelDataset d;
  d.observations = {obs("A", 2000, "S1", Area::kAmd, 0.1, 1e-300, 123456.789), obs("B,x", 2001, "S\"2")};
  const auto path = std::filesystem::temp_directory_path() / "hpjks_panel_roundtrip.csv";
  write_panel(path, d);
  const auto back = load_panel(path);
  CHECK(back.observations == d.observations);
  std::filesystem::remove(path);
}
