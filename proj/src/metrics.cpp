#include "ppdre/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace ppdre {

namespace {
void check_lengths(const Vector& a, const Vector& b, const char* op) {
  require(a.size() == b.size(), std::string(op) + ": length mismatch");
  require(a.size() >= 1, std::string(op) + ": empty input");
}
}  // namespace

double rmse(const Vector& estimates, const Vector& truths) {
  check_lengths(estimates, truths, "rmse");
  require(truths.allFinite() && estimates.allFinite(), "rmse: non-finite input");
  return std::sqrt((estimates - truths).squaredNorm() / double(estimates.size()));
}

double rmsle(const Vector& estimates, const Vector& truths) {
  check_lengths(estimates, truths, "rmsle");
  double acc = 0.0;
  for (Index i = 0; i < estimates.size(); ++i) {
    require(estimates(i) > 0.0 && truths(i) > 0.0,
            "rmsle: inputs must be strictly positive (entry " + std::to_string(i) + ")");
    const double diff = std::log(estimates(i)) - std::log(truths(i));
    acc += diff * diff;
  }
  return std::sqrt(acc / double(estimates.size()));
}

double rmsle_clamped(const Vector& estimates, const Vector& truths, double floor,
                     Index* clamped_count) {
  Vector lifted = estimates;
  Index count = 0;
  for (Index i = 0; i < lifted.size(); ++i) {
    if (lifted(i) < floor) {
      lifted(i) = floor;
      ++count;
    }
  }
  if (clamped_count) *clamped_count = count;
  return rmsle(lifted, truths);
}

double mae_mi(double estimate, double truth) { return std::abs(estimate - truth); }

double nmse(const Vector& y_true, const Vector& y_pred) {
  check_lengths(y_true, y_pred, "nmse");
  const double mean = y_true.mean();
  const double var = (y_true.array() - mean).square().sum() / double(y_true.size());
  require(var > 0.0, "nmse: test responses have zero variance");
  return (y_true - y_pred).squaredNorm() / double(y_true.size()) / var;
}

double ase(const std::function<double(double)>& g_hat,
           const std::function<double(double)>& g_star, const Vector& t_sample) {
  require(t_sample.size() >= 1, "ase: empty dose sample");
  double acc = 0.0;
  for (Index i = 0; i < t_sample.size(); ++i) {
    const double diff = g_hat(t_sample(i)) - g_star(t_sample(i));
    acc += diff * diff;
  }
  return acc / double(t_sample.size());
}

bool valid_metric_name(const std::string& name) {
  return name == "rmse" || name == "rmsle" || name == "mae_mi" || name == "nmse" ||
         name == "ase" || name == "error";
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_report(const std::vector<MetricRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw Error("write_report: cannot open '" + path + "'");
  out << "scenario,method,seed,metric,value,n,runtime_s\n";
  for (const MetricRecord& r : records) {
    require(valid_metric_name(r.metric), "write_report: unknown metric '" + r.metric + "'");
    require(std::isfinite(r.value), "write_report: non-finite value for " + r.metric);
    require(r.scenario.find(',') == std::string::npos &&
                r.method.find(',') == std::string::npos,
            "write_report: scenario/method must not contain commas");
    out << r.scenario << ',' << r.method << ',' << r.seed << ',' << r.metric << ','
        << format_double(r.value) << ',' << r.n << ',' << format_double(r.runtime_s)
        << '\n';
  }
  if (!out) throw Error("write_report: write failed for '" + path + "'");
}

void write_grid_dump(const std::string& path, const Vector& x1, const Vector& x2,
                     const Vector& r_true, const Vector& r_hat) {
  const Index n = x1.size();
  require(x2.size() == n && r_true.size() == n && r_hat.size() == n,
          "write_grid_dump: length mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_grid_dump: cannot open '" + path + "'");
  out << "x1,x2,r_true,r_hat\n";
  for (Index i = 0; i < n; ++i) {
    out << format_double(x1(i)) << ',' << format_double(x2(i)) << ','
        << format_double(r_true(i)) << ',' << format_double(r_hat(i)) << '\n';
  }
  if (!out) throw Error("write_grid_dump: write failed for '" + path + "'");
}

}  // namespace ppdre
