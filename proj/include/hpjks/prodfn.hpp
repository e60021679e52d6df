#pragma once

// Log-linear production function fits per (sector, area) cell, residuals,
// and per-firm TFP estimates on the full series and on each half.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpjks/panel.hpp"

namespace hpjks {

struct ProductionEstimate {
  std::string sector;
  Area area = Area::kBmd;
  std::map<int, double> beta0_by_year;
  double beta1 = 0.0;
  double beta2 = 0.0;
  std::size_t n_obs = 0;
  double residual_variance = 0.0;

  /// log V - beta0(year) - beta1 log K - beta2 log L. Throws DataError for a
  /// year without an intercept.
  double residual(const PanelObservation& obs) const;
};

/// Interface for production function estimators. Implementations fit one
/// (sector, area) cell; they receive only that cell's observations.
class ProductionFunctionEstimator {
 public:
  virtual ~ProductionFunctionEstimator() = default;
  virtual ProductionEstimate estimate(std::span<const PanelObservation> cell, const std::string& sector,
                                      Area area) const = 0;
};

/// Least squares of log V on log K, log L and a full set of year indicators
/// (no common intercept). With fixed shares, only the year intercepts are
/// fitted, on log V - beta1 log K - beta2 log L.
class LeastSquaresEstimator final : public ProductionFunctionEstimator {
 public:
  struct FixedShares {
    double beta1 = 0.0;
    double beta2 = 0.0;
  };

  LeastSquaresEstimator() = default;
  explicit LeastSquaresEstimator(FixedShares shares) : shares_(shares) {}

  ProductionEstimate estimate(std::span<const PanelObservation> cell, const std::string& sector,
                              Area area) const override;

 private:
  std::optional<FixedShares> shares_;
};

/// Fits the (sector, area) cell of `dataset`. Throws DataError for an empty
/// cell and RankDeficientError for a collinear design.
ProductionEstimate estimate_production_function(const PanelDataset& dataset, const std::string& sector, Area area,
                                                const ProductionFunctionEstimator& estimator = LeastSquaresEstimator{});

struct Residual {
  std::string firm_id;
  int year = 0;
  double value = 0.0;
};

/// One residual per observation of the estimate's (sector, area) cell.
std::vector<Residual> compute_residuals(const PanelDataset& dataset, const ProductionEstimate& estimate);

/// Per-firm TFP estimate: mean residual over all periods and over each half.
struct TripleEstimate {
  std::string firm_id;
  std::string sector;
  Area area = Area::kBmd;
  double theta_full = 0.0;
  double theta_h1 = 0.0;
  double theta_h2 = 0.0;
  std::size_t tenure = 0;
};

/// Averages a time-ordered residual series over the full series and over
/// the floor(T/2) / remainder halves. Throws std::invalid_argument if T < 2.
TripleEstimate triple_from_residuals(std::span<const double> residuals);

/// Throws DataError when a firm-year of some series has no residual.
std::vector<TripleEstimate> tfp_estimates(std::span<const Residual> residuals, std::span<const FirmSeries> series);

/// Everything the test needs for one (sector, area) cell.
struct CellEstimates {
  std::string sector;
  Area area = Area::kBmd;
  ProductionEstimate production;
  std::vector<TripleEstimate> triples;
};

/// Fits every (sector, area) cell on the full cleaned sample, then builds
/// triples for firms that survive the tenure filter. Cells come out ordered by
/// sector, then AMD before BMD. A cell whose fit fails is reported through
/// `errors` (keyed by sector) and skipped.
std::vector<CellEstimates> estimate_cells(const PanelDataset& cleaned, int min_tenure,
                                          bool require_consecutive_years = false,
                                          const ProductionFunctionEstimator& estimator = LeastSquaresEstimator{},
                                          std::map<std::string, std::string>* errors = nullptr);

}  // namespace hpjks
