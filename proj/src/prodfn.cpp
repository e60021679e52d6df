#include "hpjks/prodfn.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "hpjks/error.hpp"

namespace hpjks {

double ProductionEstimate::residual(const PanelObservation& obs) const {
  const auto it = beta0_by_year.find(obs.year);
  if (it == beta0_by_year.end()) {
    throw DataError("no intercept for year " + std::to_string(obs.year) + " in the " + sector + "/" +
                    std::string(to_string(area)) + " production estimate");
  }
  return std::log(obs.value_added) - it->second - beta1 * std::log(obs.capital) - beta2 * std::log(obs.labor);
}

ProductionEstimate LeastSquaresEstimator::estimate(std::span<const PanelObservation> cell, const std::string& sector,
                                                   Area area) const {
  if (cell.empty()) {
    throw DataError("empty production cell " + sector + "/" + std::string(to_string(area)));
  }
  std::set<int> year_set;
  for (const auto& o : cell) year_set.insert(o.year);
  std::map<int, Eigen::Index> year_col;
  const Eigen::Index slopes = shares_ ? 0 : 2;
  for (int y : year_set) year_col.emplace(y, slopes + static_cast<Eigen::Index>(year_col.size()));

  const auto n = static_cast<Eigen::Index>(cell.size());
  const auto p = slopes + static_cast<Eigen::Index>(year_col.size());
  if (n < p) throw RankDeficientError("fewer observations than parameters in " + sector);

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = cell[static_cast<std::size_t>(i)];
    const double lk = std::log(o.capital);
    const double ll = std::log(o.labor);
    y(i) = std::log(o.value_added);
    if (shares_) {
      y(i) -= shares_->beta1 * lk + shares_->beta2 * ll;
    } else {
      x(i, 0) = lk;
      x(i, 1) = ll;
    }
    x(i, year_col.at(o.year)) = 1.0;
  }
  if (!y.allFinite() || !x.allFinite()) {
    throw std::invalid_argument("production cell contains non-positive or missing values; clean the panel first");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) {
    throw RankDeficientError("collinear production design in " + sector + "/" + std::string(to_string(area)));
  }
  const Eigen::VectorXd coef = qr.solve(y);
  const Eigen::VectorXd resid = y - x * coef;

  ProductionEstimate est;
  est.sector = sector;
  est.area = area;
  est.beta1 = shares_ ? shares_->beta1 : coef(0);
  est.beta2 = shares_ ? shares_->beta2 : coef(1);
  for (const auto& [year, col] : year_col) est.beta0_by_year[year] = coef(col);
  est.n_obs = cell.size();
  est.residual_variance = n > p ? resid.squaredNorm() / static_cast<double>(n - p) : 0.0;
  return est;
}

namespace {

std::vector<PanelObservation> cell_of(const PanelDataset& dataset, const std::string& sector, Area area) {
  std::vector<PanelObservation> cell;
  for (const auto& o : dataset.observations) {
    if (o.sector == sector && o.area == area) cell.push_back(o);
  }
  return cell;
}

}  // namespace

ProductionEstimate estimate_production_function(const PanelDataset& dataset, const std::string& sector, Area area,
                                                const ProductionFunctionEstimator& estimator) {
  const auto cell = cell_of(dataset, sector, area);
  return estimator.estimate(cell, sector, area);
}

std::vector<Residual> compute_residuals(const PanelDataset& dataset, const ProductionEstimate& estimate) {
  std::vector<Residual> out;
  for (const auto& o : dataset.observations) {
    if (o.sector != estimate.sector || o.area != estimate.area) continue;
    out.push_back({o.firm_id, o.year, estimate.residual(o)});
  }
  return out;
}

TripleEstimate triple_from_residuals(std::span<const double> residuals) {
  const std::size_t t = residuals.size();
  if (t < 2) throw std::invalid_argument("a TFP triple needs at least two residuals");
  const std::size_t h = first_half_length(t);
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < h; ++i) s1 += residuals[i];
  for (std::size_t i = h; i < t; ++i) s2 += residuals[i];
  TripleEstimate out;
  out.theta_full = (s1 + s2) / static_cast<double>(t);
  out.theta_h1 = s1 / static_cast<double>(h);
  out.theta_h2 = s2 / static_cast<double>(t - h);
  out.tenure = t;
  return out;
}

std::vector<TripleEstimate> tfp_estimates(std::span<const Residual> residuals, std::span<const FirmSeries> series) {
  std::unordered_map<std::string, std::map<int, double>> by_firm;
  for (const auto& r : residuals) by_firm[r.firm_id][r.year] = r.value;

  std::vector<TripleEstimate> out;
  out.reserve(series.size());
  std::vector<double> values;
  for (const auto& s : series) {
    const auto [first, second] = split_halves(s);
    values.clear();
    const auto firm = by_firm.find(s.firm_id);
    if (firm == by_firm.end()) throw DataError("no residuals for firm " + s.firm_id);
    for (const auto* half : {&first, &second}) {
      for (const auto& o : half->observations) {
        const auto it = firm->second.find(o.year);
        if (it == firm->second.end()) {
          throw DataError("missing residual for firm " + s.firm_id + " in year " + std::to_string(o.year));
        }
        values.push_back(it->second);
      }
    }
    TripleEstimate triple = triple_from_residuals(values);
    triple.firm_id = s.firm_id;
    triple.sector = s.sector;
    triple.area = s.area;
    out.push_back(std::move(triple));
  }
  return out;
}

std::vector<CellEstimates> estimate_cells(const PanelDataset& cleaned, int min_tenure, bool require_consecutive_years,
                                          const ProductionFunctionEstimator& estimator,
                                          std::map<std::string, std::string>* errors) {
  std::set<std::pair<std::string, Area>> keys;
  for (const auto& o : cleaned.observations) keys.insert({o.sector, o.area});

  const PanelDataset tested = filter_min_periods(cleaned, min_tenure, require_consecutive_years);
  const auto series = group_series(tested);

  std::vector<CellEstimates> out;
  for (const auto& [sector, area] : keys) {
    CellEstimates cell;
    cell.sector = sector;
    cell.area = area;
    try {
      cell.production = estimate_production_function(cleaned, sector, area, estimator);
      const auto residuals = compute_residuals(tested, cell.production);
      std::vector<FirmSeries> cell_series;
      for (const auto& s : series) {
        if (s.sector == sector && s.area == area) cell_series.push_back(s);
      }
      cell.triples = tfp_estimates(residuals, cell_series);
    } catch (const std::exception& e) {
      if (!errors) throw;
      auto& msg = (*errors)[sector];
      if (!msg.empty()) msg += "; ";
      msg += std::string(to_string(area)) + ": " + e.what();
      continue;
    }
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace hpjks
