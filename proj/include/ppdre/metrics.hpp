#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ppdre/common.hpp"

namespace ppdre {

double rmse(const Vector& estimates, const Vector& truths);

/// Root mean squared difference of logs; inputs must be strictly positive.
double rmsle(const Vector& estimates, const Vector& truths);

/// rmsle with estimates clamped below at `floor` first (baselines can emit
/// exact zeros); *clamped_count reports how many entries were lifted.
double rmsle_clamped(const Vector& estimates, const Vector& truths, double floor,
                     Index* clamped_count = nullptr);

double mae_mi(double estimate, double truth);

/// Mean squared error over sigma_y^2, the denominator-n variance of the
/// true test responses.
double nmse(const Vector& y_true, const Vector& y_pred);

/// Mean squared gap between two curves over the sampled doses.
double ase(const std::function<double(double)>& g_hat,
           const std::function<double(double)>& g_star, const Vector& t_sample);

/// One benchmark result row.
struct MetricRecord {
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  std::string metric;  // rmse | rmsle | mae_mi | nmse | ase | error
  double value = 0.0;
  Index n = 0;
  double runtime_s = 0.0;
};

/// True when the metric name belongs to the report vocabulary.
bool valid_metric_name(const std::string& name);

/// Fixed-header CSV (`scenario,method,seed,metric,value,n,runtime_s`), one
/// row per record in input order, 17-significant-digit decimals, LF line
/// endings. Round-trips doubles exactly.
void write_report(const std::vector<MetricRecord>& records, const std::string& path);

/// Plot-ready lattice dump with rows `x1,x2,r_true,r_hat`.
void write_grid_dump(const std::string& path, const Vector& x1, const Vector& x2,
                     const Vector& r_true, const Vector& r_hat);

/// Shortest-exact formatting used by every CSV writer (17 significant
/// digits suffice to round-trip an IEEE double).
std::string format_double(double v);

}  // namespace ppdre
