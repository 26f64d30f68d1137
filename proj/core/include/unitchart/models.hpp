#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "unitchart/errors.hpp"
#include "unitchart/rng.hpp"

namespace unitchart {

enum class Family { beta, simplex, unit_gamma };

std::string_view family_name(Family family);
Family family_from_name(std::string_view name);

struct MomentReport {
  double mean = 0.0;
  double variance = 0.0;
  double std_dev = 0.0;
  double cv = 0.0;
  double skewness = 0.0;
  double ex_kurtosis_plus3 = 0.0;  // kurtosis on the normal-equals-3 scale
};

namespace detail {
// Monotone quantile/cdf grid backing Simplex evaluation and sampling;
// built once per parameter pair and then read-only.
struct SimplexGrid;

// Log-likelihood from raw parameter values without constructing a model (in
// particular without building the simplex grid), for hot optimizer loops.
// Data must already be validated; invalid parameters or a non-finite sum
// yield the same large negative sentinel as log_likelihood.
double log_likelihood_raw(Family family, double mu, double dispersion,
                          const std::vector<double>& data) noexcept;
}  // namespace detail

// One of the three mean-parametrized unit-interval families:
//   beta:       mean mu, precision phi     (shapes mu*phi, (1-mu)*phi)
//   simplex:    mean mu, dispersion sigma
//   unit_gamma: mean mu, shape tau         (theta = m/(1-m), m = mu^(1/tau))
// Immutable after construction and cheap to copy; safe to share across
// threads. Sampling needs an exclusively owned RngStream per worker.
class UnitModel {
 public:
  static UnitModel beta(double mu, double phi);
  static UnitModel simplex(double mu, double sigma);
  static UnitModel unit_gamma(double mu, double tau);
  static UnitModel make(Family family, double mu, double dispersion);

  Family family() const { return family_; }
  double mu() const { return mu_; }
  double dispersion() const { return disp_; }

  double mean() const { return mu_; }
  double variance() const;
  double std_dev() const;

  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  MomentReport moment_report() const;

  // One draw, clamped strictly inside (0, 1) at machine-epsilon margin.
  double sample(RngStream& stream) const;

 private:
  UnitModel(Family family, double mu, double dispersion);

  Family family_;
  double mu_;
  double disp_;
  // Family-specific derived constants.
  double a_ = 0.0;        // beta: alpha;       unit_gamma: theta
  double b_ = 0.0;        // beta: beta shape;  simplex: 1/(2 sigma^2)
  double log_norm_ = 0.0; // log normalization constant of the density
  std::shared_ptr<const detail::SimplexGrid> grid_;  // simplex only
};

// Sum of log densities over data. Invalid parameters yield a large negative
// sentinel (not a throw) so optimizers can recover; data outside (0,1)
// throws DataError naming the 1-based index.
double log_likelihood(Family family, const std::vector<double>& params,
                      const std::vector<double>& data);

}  // namespace unitchart
