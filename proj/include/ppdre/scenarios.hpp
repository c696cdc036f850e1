#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppdre/common.hpp"

namespace ppdre {

/// A synthetic benchmark world: the two samples plus whatever ground truth
/// the scenario admits (a pointwise ratio, a scalar target, or both).
struct LabeledScenario {
  SampleSet x_p;
  SampleSet x_q;
  RatioFn ratio_truth;                 // empty when no pointwise truth exists
  std::optional<double> scalar_truth;  // e.g. the mutual information
  std::string descriptor;

  bool has_ratio_truth() const { return static_cast<bool>(ratio_truth); }
};

/// p = N(0, I_d), q = N(0, 2 I_d); true ratio 2^{d/2} exp(-|x|^2 / 4).
LabeledScenario gen_gaussian_pair(Index d, Index n_p, Index n_q, std::uint64_t seed);

/// Treatment assignment t = c^T x + eps with standard normal covariates and
/// noise. The q sample holds the joint rows (t, x); the p sample permutes
/// the t column, which follows the product of the marginals. The true
/// ratio is the stabilized weight N(t; 0, 1 + |c|^2) / N(t; c^T x, 1).
LabeledScenario gen_stabilized_weights(const Vector& c, Index n, std::uint64_t seed);

/// Jointly Gaussian (u, v) in R^{2p} with corr(U_i, V_j) = rho when i = j.
/// The p sample holds the joint rows; the q sample permutes the v block.
/// Scalar truth: MI = -(p/2) ln(1 - rho^2).
LabeledScenario gen_mi_gaussian(Index p, double rho, Index n, std::uint64_t seed);

/// Semi-synthetic continuous-dosage world on 25 uniform [0, 1] covariates.
/// The outcome surface factorizes as h(t, x) = time_part(t) * shape(x),
/// which the Monte Carlo oracles exploit.
struct DoseResponseData {
  Matrix x;  // n x 25
  Vector t;  // doses in (0, 1)
  Vector y;  // observed outcomes h(t, x) + 0.5 eps
  std::string descriptor;

  static double time_part(double t);
  static double shape(Eigen::Ref<const Vector> x_row);
  static double mu_tilde(Eigen::Ref<const Vector> x_row);  // mean of the latent dose

  /// Average dose-response E_X[h(t, X)], Monte Carlo over the oracle pool.
  double adrf(double t) const;
  /// tau-quantile of h(t, X) + 0.5 eps over the oracle pool.
  double qdrf(double t, double tau) const;
  /// True stabilized weight f_T(t) / f_{T|X}(t | x); the logistic-transform
  /// Jacobians cancel, leaving a ratio of normal densities in the latent
  /// dose, marginalized over the oracle pool.
  double stabilized_weight(double t, Eigen::Ref<const Vector> x_row) const;
  /// Stabilized weights for the generated sample rows.
  Vector sample_stabilized_weights() const;

  Vector mc_shape;  // oracle pool statistics
  Vector mc_mu;
  Vector mc_eps;
};

DoseResponseData gen_dose_response(Index n, std::uint64_t seed, Index mc_n = 100000);

/// Biased train/test partition of a labeled dataset: rows enter training
/// with probability sigma(4 w^T (x - mean) / sd), the rest form the test
/// set. A degenerate projection direction is redrawn up to 10 times.
struct CovariateShiftSplit {
  Matrix x_train;
  Vector y_train;
  Matrix x_test;
  Vector y_test;
  Vector omega;
  Vector selection_prob;  // per original row
  std::string descriptor;
};

CovariateShiftSplit gen_covariate_shift(const Matrix& x, const Vector& y,
                                        std::uint64_t seed);

/// Friedman #1 regression surface on [0, 1]^10.
struct RegressionData {
  Matrix x;
  Vector y;
  std::string descriptor;
};

RegressionData gen_friedman(Index n, double noise_sd, std::uint64_t seed);

/// Density of N(mean, sd^2) at v.
double normal_pdf(double v, double mean, double sd);

}  // namespace ppdre
