#include "unitchart/charts.hpp"

#include <cmath>
#include <sstream>

#include "unitchart/errors.hpp"

namespace unitchart {
namespace {

void check_observation(double x, std::size_t index) {
  if (!(std::isfinite(x) && x > 0.0 && x < 1.0)) {
    std::ostringstream os;
    os << "observation " << index << " (" << x
       << ") lies outside the open unit interval";
    throw DataError(os.str(), index);
  }
}

}  // namespace

ShewhartChart shewhart_limits(const UnitModel& model, double alpha) {
  if (!(std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie strictly inside (0,1)");
  }
  ShewhartChart chart;
  chart.alpha = alpha;
  chart.cl = model.mean();
  chart.lcl = model.quantile(alpha / 2.0);
  chart.ucl = model.quantile(1.0 - alpha / 2.0);
  if (!(chart.lcl < chart.cl && chart.cl < chart.ucl)) {
    throw DomainError("probability limits do not straddle the centre line");
  }
  return chart;
}

EwmaChart ewma_limits(const UnitModel& model, double lambda, double L) {
  if (!(std::isfinite(lambda) && lambda > 0.0 && lambda <= 1.0)) {
    throw DomainError("lambda must lie in (0,1]");
  }
  if (!(std::isfinite(L) && L > 0.0)) {
    throw DomainError("limit multiplier L must be positive");
  }
  EwmaChart chart;
  chart.lambda = lambda;
  chart.L = L;
  chart.cl = model.mean();
  chart.sigma0x = model.std_dev();
  const double width =
      L * chart.sigma0x * std::sqrt(lambda / (2.0 - lambda));
  chart.lcl = chart.cl - width;
  chart.ucl = chart.cl + width;
  if (!(chart.lcl > 0.0 && chart.ucl < 1.0)) {
    throw DomainError(
        "control limits fall outside the unit interval; reduce L or lambda");
  }
  return chart;
}

MonitorResult monitor(const ShewhartChart& chart, const std::vector<double>& data,
                      bool early_exit) {
  MonitorResult result;
  result.statistic_path.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    check_observation(data[i], i + 1);
    result.statistic_path.push_back(data[i]);
    if (!result.signaled && (data[i] < chart.lcl || data[i] > chart.ucl)) {
      result.signaled = true;
      result.signal_index = i + 1;
      if (early_exit) break;
    }
  }
  return result;
}

MonitorResult monitor(const EwmaChart& chart, const std::vector<double>& data,
                      bool early_exit) {
  MonitorResult result;
  result.statistic_path.reserve(data.size());
  double z = chart.cl;
  for (std::size_t i = 0; i < data.size(); ++i) {
    check_observation(data[i], i + 1);
    z = ewma_update(z, data[i], chart.lambda);
    result.statistic_path.push_back(z);
    if (!result.signaled && (z < chart.lcl || z > chart.ucl)) {
      result.signaled = true;
      result.signal_index = i + 1;
      if (early_exit) break;
    }
  }
  return result;
}

}  // namespace unitchart
