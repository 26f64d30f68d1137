#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "unitchart/models.hpp"

namespace unitchart {

// Two-sided Shewhart chart for individual observations on (0,1) with
// equal-tail probability limits.
struct ShewhartChart {
  double lcl = 0.0;
  double ucl = 0.0;
  double cl = 0.0;
  double alpha = 0.0;  // total false-alarm probability per point
};

// Two-sided EWMA chart with steady-state (asymptotic) limits fixed from the
// first plotted point. The smoothing recursion starts at the centre line.
struct EwmaChart {
  double lambda = 0.0;   // smoothing constant, 0 < lambda <= 1
  double L = 0.0;        // limit width multiplier
  double lcl = 0.0;
  double ucl = 0.0;
  double cl = 0.0;       // in-control mean, also the smoothing anchor
  double sigma0x = 0.0;  // in-control standard deviation of an observation
};

// Outcome of running a chart over a data sequence. statistic_path holds the
// plotted statistic for each processed observation (the raw value for a
// Shewhart chart, the smoothed value for an EWMA chart). signal_index is the
// 1-based position of the first point strictly outside the limits; points on
// a limit count as in control.
struct MonitorResult {
  std::vector<double> statistic_path;
  std::optional<std::size_t> signal_index;
  bool signaled = false;
};

ShewhartChart shewhart_limits(const UnitModel& model, double alpha);

EwmaChart ewma_limits(const UnitModel& model, double lambda, double L);

// One step of the smoothing recursion.
inline double ewma_update(double z_prev, double x, double lambda) {
  return lambda * x + (1.0 - lambda) * z_prev;
}

// Run the chart over data. With early_exit the scan stops at the first
// signal, so statistic_path is truncated there; otherwise the full path is
// returned with the first signal (if any) recorded.
MonitorResult monitor(const ShewhartChart& chart, const std::vector<double>& data,
                      bool early_exit = false);
MonitorResult monitor(const EwmaChart& chart, const std::vector<double>& data,
                      bool early_exit = false);

}  // namespace unitchart
