#pragma once

#include <cstdint>
#include <string>

#include "ppdre/common.hpp"
#include "ppdre/rng.hpp"

namespace ppdre {

/// Gaussian kernel exp(-|x - x'|^2 / (2 sigma^2)).
double gaussian_kernel(Eigen::Ref<const Vector> x, Eigen::Ref<const Vector> x2,
                       double sigma);

/// Kernel-expansion ratio model shared by uLSIF and KLIEP:
///   r(x) = sum_l theta_l K(x, c_l),
/// centers drawn from the numerator sample. uLSIF clamps evaluations at 0;
/// KLIEP clamps at 1e-12 to keep downstream logs finite.
struct KernelRatioModel {
  std::string method;  // "ulsif" or "kliep"
  Matrix centers;      // b x d
  double sigma = 1.0;
  Vector theta;        // b, entrywise >= 0
  Vector theta_raw;    // uLSIF: ridge solution before truncation
  double clamp_floor = 0.0;
  bool log_clip_flagged = false;  // KLIEP hit the log clamp during fitting

  double evaluate(Eigen::Ref<const Vector> x) const;
  Vector evaluate_all(const Matrix& rows) const;
};

/// Probabilistic-classification ratio model: logistic regression on the
/// labels (+1 for the numerator sample), corrected by the class prior
/// n_q / n_p, so r(x) = prior * exp(w^T x + b).
struct LogisticRatioModel {
  Vector w;
  double intercept = 0.0;
  double prior = 1.0;  // n_q / n_p
  bool separation_warning = false;

  double evaluate(Eigen::Ref<const Vector> x) const;
  Vector evaluate_all(const Matrix& rows) const;
};

/// b centers drawn from the rows of x_p without replacement.
Matrix draw_centers(const SampleSet& x_p, Index b, SeededRng& rng);

/// Median pairwise distance over the first rows of each sample (at most
/// `cap` rows per sample); the customary scale for the kernel bandwidth
/// grid. Deterministic given the inputs.
double median_pairwise_distance(const SampleSet& x_p, const SampleSet& x_q,
                                Index cap = 512);

/// Ridge least-squares fit of the kernel expansion, coefficients then
/// truncated at zero.
KernelRatioModel ulsif_fit(const SampleSet& x_p, const SampleSet& x_q, double sigma,
                           double lambda, Index b, std::uint64_t seed);

/// Projected gradient ascent on the log-likelihood part of the
/// unnormalized KL objective, keeping theta >= 0 and the q-sample mean of
/// the expansion pinned to 1. The step size halves whenever an ascent step
/// would lower the objective.
KernelRatioModel kliep_fit(const SampleSet& x_p, const SampleSet& x_q, double sigma,
                           Index b, double step, int iters, std::uint64_t seed);

/// Full-batch gradient descent on the logistic cross-entropy; weights are
/// L2-clipped at 50 and near-zero loss with a growing weight norm raises
/// the separation flag.
LogisticRatioModel logistic_ratio_fit(const SampleSet& x_p, const SampleSet& x_q,
                                      double lr, int iters, std::uint64_t seed);

}  // namespace ppdre
