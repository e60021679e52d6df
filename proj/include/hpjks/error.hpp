#pragma once

#include <stdexcept>
#include <string>

namespace hpjks {

/// Input data could not be read or violates a structural contract
/// (missing file, missing column, duplicate firm-year key, malformed results).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares design without full column rank.
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The debiased variance of a cell is not strictly positive, so the cell
/// cannot be standardized.
class DegenerateVarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hpjks
