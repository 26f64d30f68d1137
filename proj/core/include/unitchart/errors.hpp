#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace unitchart {

// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// An argument lies outside its mathematical domain (bad parameter, bad
// probability, invalid bracket, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// An iterative numeric routine failed to converge. Carries the best iterate
// found and, where meaningful, an error bound for it.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what,
                        double best = std::numeric_limits<double>::quiet_NaN(),
                        double bound = std::numeric_limits<double>::quiet_NaN())
      : Error(what), best_estimate(best), error_bound(bound) {}

  double best_estimate;
  double error_bound;
};

// A data series violates its contract (value outside the open unit interval,
// too few observations after filtering, ...). `index` is 1-based and 0 when
// no single observation is at fault.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::size_t index = 0)
      : Error(what), index(index) {}

  std::size_t index;
};

// Model fitting or run-length estimation failed (optimizer stuck, excessive
// censoring, singular information matrix, ...).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Chart calibration cannot meet its target (no multiplier below the search
// ceiling reaches the ARL window).
class DesignError : public Error {
 public:
  using Error::Error;
};

}  // namespace unitchart
