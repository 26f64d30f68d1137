#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "doctest.h"
#include "unitchart/errors.hpp"
#include "unitchart/models.hpp"
#include "unitchart/numerics.hpp"
#include "unitchart/rng.hpp"

using unitchart::DomainError;
using unitchart::Family;
using unitchart::RngStream;
using unitchart::UnitModel;

namespace {

struct CaseRow {
  double dispersion;
  double sigma0x;  // reference in-control standard deviation
  double cv;       // reference coefficient of variation
};

const CaseRow kBetaRows[] = {{290.0, 0.02344842, 0.1172421},
                             {148.0, 0.03276928, 0.1638464},
                             {80.0, 0.04444444, 0.2222222},
                             {31.0, 0.07071068, 0.3535534}};
const CaseRow kSimplexRows[] = {{0.37, 0.02355733, 0.1177866},
                                {0.50, 0.03170082, 0.1585041},
                                {0.71, 0.04460488, 0.2230244},
                                {1.20, 0.07309293, 0.3654647}};
const CaseRow kUnitGammaRows[] = {{155.0, 0.02582828, 0.1291414},
                                  {96.0, 0.03279827, 0.1639913},
                                  {51.0, 0.04493217, 0.2246609},
                                  {20.0, 0.07138937, 0.3569468}};

std::vector<UnitModel> case_models() {
  std::vector<UnitModel> out;
  for (const auto& r : kBetaRows) out.push_back(UnitModel::beta(0.2, r.dispersion));
  for (const auto& r : kSimplexRows)
    out.push_back(UnitModel::simplex(0.2, r.dispersion));
  for (const auto& r : kUnitGammaRows)
    out.push_back(UnitModel::unit_gamma(0.2, r.dispersion));
  return out;
}

}  // namespace

TEST_CASE("matched in-control standard deviations and CVs at mu0 = 0.2") {
  for (const auto& r : kBetaRows) {
    const auto m = UnitModel::beta(0.2, r.dispersion);
    CHECK(std::fabs(m.std_dev() - r.sigma0x) < 1e-7);
    CHECK(std::fabs(m.std_dev() / m.mean() - r.cv) < 1e-7);
  }
  for (const auto& r : kSimplexRows) {
    const auto m = UnitModel::simplex(0.2, r.dispersion);
    CHECK(std::fabs(m.std_dev() - r.sigma0x) < 1e-7);
    CHECK(std::fabs(m.std_dev() / m.mean() - r.cv) < 1e-7);
  }
  for (const auto& r : kUnitGammaRows) {
    const auto m = UnitModel::unit_gamma(0.2, r.dispersion);
    CHECK(std::fabs(m.std_dev() - r.sigma0x) < 1e-7);
    CHECK(std::fabs(m.std_dev() / m.mean() - r.cv) < 1e-7);
  }
}

TEST_CASE("closed-form moments: beta and unit gamma") {
  const auto b = UnitModel::beta(0.2, 148.0);
  CHECK(b.mean() == doctest::Approx(0.2).epsilon(1e-13));
  CHECK(b.variance() == doctest::Approx(0.2 * 0.8 / 149.0).epsilon(1e-12));

  const auto g = UnitModel::unit_gamma(0.2, 96.0);
  const double m1 = std::exp(std::log(0.2) / 96.0);
  const double theta = m1 / (1.0 - m1);
  const double ex2 = std::pow(theta / (theta + 2.0), 96.0);
  CHECK(g.mean() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(g.variance() == doctest::Approx(ex2 - 0.04).epsilon(1e-10));

  // Beta skewness closed form: 2(b-a) sqrt(a+b+1) / ((a+b+2) sqrt(ab)).
  const double a = 0.2 * 148.0, bb = 0.8 * 148.0;
  const double skew =
      2.0 * (bb - a) * std::sqrt(a + bb + 1.0) / ((a + bb + 2.0) * std::sqrt(a * bb));
  const auto rep = b.moment_report();
  CHECK(rep.skewness == doctest::Approx(skew).epsilon(1e-8));
  CHECK(rep.mean == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(rep.std_dev == doctest::Approx(b.std_dev()).epsilon(1e-10));
}

TEST_CASE("densities integrate to one") {
  for (const auto& m : case_models()) {
    const double total = unitchart::quad(
        [&m](double x) { return m.pdf(x); }, 1e-12, 1.0 - 1e-12,
        {1e-10, 1e-10, 4000});
    CHECK(std::fabs(total - 1.0) < 1e-8);
  }
}

TEST_CASE("pdf, cdf and quantile spot values") {
  const auto b = UnitModel::beta(0.2, 290.0);
  CHECK(b.pdf(0.2) == doctest::Approx(16.9587521876).epsilon(1e-9));
  CHECK(b.cdf(0.25) == doctest::Approx(0.979446114829).epsilon(1e-10));
  CHECK(b.quantile(0.00135) == doctest::Approx(0.135466650979).epsilon(1e-9));
  CHECK(b.quantile(0.99865) == doctest::Approx(0.275494185524).epsilon(1e-9));

  const auto b148 = UnitModel::beta(0.2, 148.0);
  CHECK(b148.quantile(0.00135) == doctest::Approx(0.113261722923).epsilon(1e-9));
  CHECK(b148.quantile(0.99865) == doctest::Approx(0.308077024692).epsilon(1e-9));

  const auto s = UnitModel::simplex(0.2, 0.37);
  CHECK(s.pdf(0.2) == doctest::Approx(16.8472246791).epsilon(1e-8));
  CHECK(s.cdf(0.18) == doctest::Approx(0.201547269454).epsilon(1e-6));
  CHECK(s.quantile(0.00135) == doctest::Approx(0.137932007608).epsilon(1e-5));
  CHECK(s.quantile(0.99865) == doctest::Approx(0.278374195143).epsilon(1e-5));

  const auto s12 = UnitModel::simplex(0.2, 1.2);
  CHECK(s12.pdf(0.35) == doctest::Approx(0.801087952472).epsilon(1e-8));
  CHECK(s12.cdf(0.5) == doctest::Approx(0.999447513243).epsilon(1e-6));
  CHECK(s12.quantile(0.00135) == doctest::Approx(0.0594431161009).epsilon(1e-4));
  CHECK(s12.quantile(0.99865) == doctest::Approx(0.474265370536).epsilon(1e-4));

  const auto g = UnitModel::unit_gamma(0.2, 20.0);
  CHECK(g.pdf(0.3) == doctest::Approx(1.84104559288).epsilon(1e-9));
  CHECK(g.cdf(0.3) == doctest::Approx(0.907487989997).epsilon(1e-10));
  CHECK(g.quantile(0.00135) == doctest::Approx(0.0485343405427).epsilon(1e-9));
  CHECK(g.quantile(0.99865) == doctest::Approx(0.462858627967).epsilon(1e-9));

  const auto g155 = UnitModel::unit_gamma(0.2, 155.0);
  CHECK(g155.quantile(0.00135) == doctest::Approx(0.130600881418).epsilon(1e-9));
  CHECK(g155.quantile(0.99865) == doctest::Approx(0.284889521175).epsilon(1e-9));
}

TEST_CASE("fitted simplex quantiles for the worked data set") {
  const auto m = UnitModel::simplex(0.9534, 3.5742);
  CHECK(m.quantile(0.00135) == doctest::Approx(0.779427685398).epsilon(2e-5));
  CHECK(m.quantile(0.99865) == doctest::Approx(0.993557348469).epsilon(2e-5));
}

TEST_CASE("cdf and quantile round trips") {
  const double ps[] = {0.001, 0.00135, 0.1, 0.5, 0.9, 0.99865, 0.999};
  for (const auto& m : case_models()) {
    for (double p : ps) {
      const double x = m.quantile(p);
      CHECK(x > 0.0);
      CHECK(x < 1.0);
      CHECK(std::fabs(m.cdf(x) - p) < 1e-7);
    }
    for (double q : {0.05, 0.35, 0.65, 0.95}) {
      const double x0 = m.quantile(q);
      const double back = m.quantile(m.cdf(x0));
      CHECK(back == doctest::Approx(x0).epsilon(1e-7));
    }
  }
}

TEST_CASE("cdf endpoints are exact and monotone") {
  for (const auto& m : case_models()) {
    CHECK(m.cdf(0.0) == 0.0);
    CHECK(m.cdf(1.0) == 1.0);
    double prev = 0.0;
    for (double x = 0.02; x < 1.0; x += 0.02) {
      const double c = m.cdf(x);
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("construction is reproducible") {
  const auto a = UnitModel::make(Family::simplex, 0.2, 0.71);
  const auto b = UnitModel::make(Family::simplex, 0.2, 0.71);
  CHECK(a.quantile(0.3) == b.quantile(0.3));
  CHECK(a.cdf(0.21) == b.cdf(0.21));
  const auto c = UnitModel::make(Family::beta, 0.2, 80.0);
  CHECK(c.family() == Family::beta);
  CHECK(c.mu() == 0.2);
  CHECK(c.dispersion() == 80.0);
}

TEST_CASE("sampling matches the distribution (fixed-seed KS)") {
  // Fixed-seed smoke check at the 1% Kolmogorov critical point; across many
  // seeds individual models exceed it at the nominal rate, so the pinned
  // seed is one where all twelve cases sit comfortably inside.
  const int n = 4000;
  int stream = 1002;
  for (const auto& m : case_models()) {
    RngStream rng(1002, static_cast<std::uint64_t>(stream++));
    std::vector<double> xs(n);
    for (auto& x : xs) x = m.sample(rng);
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = m.cdf(xs[i]);
      d = std::max(d, std::fabs(f - (i + 1.0) / n));
      d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    }
    // sqrt(n) D below the 1% critical point of the Kolmogorov distribution.
    CHECK(std::sqrt(static_cast<double>(n)) * d < 1.63);
    CHECK(xs.front() > 0.0);
    CHECK(xs.back() < 1.0);
  }
}

TEST_CASE("invalid construction and evaluation") {
  CHECK_THROWS_AS(UnitModel::beta(0.0, 10.0), DomainError);
  CHECK_THROWS_AS(UnitModel::beta(1.0, 10.0), DomainError);
  CHECK_THROWS_AS(UnitModel::beta(-0.3, 10.0), DomainError);
  CHECK_THROWS_AS(UnitModel::beta(0.2, 0.0), DomainError);
  CHECK_THROWS_AS(UnitModel::simplex(0.2, -1.0), DomainError);
  CHECK_THROWS_AS(
      UnitModel::unit_gamma(0.2, std::numeric_limits<double>::infinity()),
      DomainError);

  const auto m = UnitModel::beta(0.2, 148.0);
  CHECK_THROWS_AS(m.pdf(0.0), DomainError);
  CHECK_THROWS_AS(m.pdf(1.0), DomainError);
  CHECK_THROWS_AS(m.cdf(-0.1), DomainError);
  CHECK_THROWS_AS(m.cdf(1.1), DomainError);
  CHECK_THROWS_AS(m.quantile(0.0), DomainError);
  CHECK_THROWS_AS(m.quantile(1.0), DomainError);
}

TEST_CASE("family names round trip with aliases") {
  CHECK(unitchart::family_name(Family::beta) == "beta");
  CHECK(unitchart::family_name(Family::simplex) == "simplex");
  CHECK(unitchart::family_name(Family::unit_gamma) == "unitgamma");
  CHECK(unitchart::family_from_name("beta") == Family::beta);
  CHECK(unitchart::family_from_name("simplex") == Family::simplex);
  CHECK(unitchart::family_from_name("unitgamma") == Family::unit_gamma);
  CHECK(unitchart::family_from_name("unit_gamma") == Family::unit_gamma);
  CHECK(unitchart::family_from_name("unit-gamma") == Family::unit_gamma);
  CHECK_THROWS_AS(unitchart::family_from_name("cauchy"), DomainError);
}

TEST_CASE("log density agrees with the density") {
  for (const auto& m : case_models()) {
    for (double x : {0.08, 0.2, 0.31, 0.45}) {
      CHECK(m.log_pdf(x) == doctest::Approx(std::log(m.pdf(x))).epsilon(1e-10));
    }
  }
}
