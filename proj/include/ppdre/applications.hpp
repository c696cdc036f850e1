#pragma once

#include <cstdint>

#include "ppdre/common.hpp"
#include "ppdre/model_selection.hpp"

namespace ppdre {

/// Mutual information estimate: mean of log r over the joint-sample rows.
/// Throws if the ratio evaluates nonpositive anywhere (the truncation
/// floors upstream are supposed to prevent that).
double estimate_mi(const RatioFn& ratio, const Matrix& joint_rows);

/// Quartic dose-response curve g(t) = theta_0 + theta_1 t + ... + theta_4 t^4
/// fitted under a squared or pinball loss.
struct DoseResponseFit {
  enum class Loss { Squared, Pinball };
  Eigen::Matrix<double, 5, 1> theta;
  Loss loss = Loss::Squared;
  double tau = 0.5;        // pinball level, when applicable
  double final_loss = 0.0; // smoothed objective at the returned theta

  double operator()(double t) const;
};

/// Exact weighted least squares on the quartic design via the 5x5 normal
/// equations (with a 1e-10 ridge for conditioning).
DoseResponseFit fit_adrf(const Vector& t, const Vector& y, const Vector& weights);

/// Weighted pinball regression with the kink smoothed quadratically on
/// |v| <= h, minimized by full-batch Adam from the least-squares start.
/// Returns the best iterate seen. Throws if the loss exceeds 1e6.
DoseResponseFit fit_qdrf(const Vector& t, const Vector& y, const Vector& weights,
                         double tau, double smoothing_h, double lr, int iters);

/// Importance-weighted kernel ridge regression with the fixed kernel
/// K(x, x') = exp(-|x - x'|^2 / d). The objective places the ridge inside
/// the weighted sum, so the stationarity system is
///   (K W K + lambda s I) theta = K W y,  W = diag(w) / n,  s = sum(w) / n.
struct KRRModel {
  Matrix x_train;
  Vector theta;
  double lambda = 0.0;

  double predict(Eigen::Ref<const Vector> x) const;
  Vector predict_all(const Matrix& rows) const;
};

KRRModel krr_fit(const Matrix& x_train, const Vector& y_train, const Vector& weights,
                 double lambda);

/// Weighted 5-fold CV over the given ridge grid; returns the winning lambda
/// (earliest on ties).
double krr_select_lambda(const Matrix& x_train, const Vector& y_train,
                         const Vector& weights, std::uint64_t seed,
                         const std::vector<double>& grid = {1e-4, 1e-3, 1e-2, 0.1, 1.0});

}  // namespace ppdre
