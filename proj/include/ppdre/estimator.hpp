#pragma once

#include <cstdint>
#include <vector>

#include "ppdre/basis.hpp"
#include "ppdre/common.hpp"
#include "ppdre/numerics.hpp"
#include "ppdre/rng.hpp"

namespace ppdre {

/// One multiplicative factor f(a^T x) = beta^T Phi(a^T x; gamma) of the
/// fitted ratio, together with its truncation floor: the smallest positive
/// value the factor took on the training inputs. Evaluations below the
/// floor are lifted to it so the full model stays strictly positive.
struct Projection {
  Vector a;            // unit direction, |a| = 1
  GaussianBasis basis; // centers gamma
  Vector beta;
  double floor = 0.0;

  double factor_raw(double z) const { return basis.eval(z).dot(beta); }
  double factor(double z) const {
    const double f = factor_raw(z);
    return f > floor ? f : floor;
  }
};

/// Ordered product of projections; K = 0 is the constant-1 model.
struct PPRatioModel {
  Index d = 0;
  std::vector<Projection> projections;

  Index k_count() const { return static_cast<Index>(projections.size()); }
  double evaluate(Eigen::Ref<const Vector> x) const;
  Vector evaluate_all(const Matrix& rows) const;
};

struct FitConfig {
  Index basis_size = 20;     // J
  double ridge = 1.0;        // lambda
  double learn_rate = 0.1;   // delta
  int max_inner_iters = 2000;
  double rel_tol = 1e-5;
  int rel_tol_window = 5;
  std::uint64_t seed = 0;
  // Propagate truncated factor values into the next projection's weights.
  // Disabling this is an ablation knob; raw factors may then be negative.
  bool truncate_prev_weights = true;
};

/// Closed-form ridge coefficients at fixed (a, gamma): the unique minimizer
/// of the empirical loss in beta,
///   beta = [Z^T Z / n_q + ridge I]^{-1} [W / n_p],
/// with Z the weight-scaled basis design on the q sample and W the weighted
/// basis sum over the p sample. Throws "singular profile system" when
/// ridge = 0 and the Gram matrix is singular.
Vector profile_beta(const Vector& a, const GaussianBasis& basis, double ridge,
                    const Vector& prev_weights_q, const Vector& prev_weights_p,
                    const SampleSet& x_q, const SampleSet& x_p);

/// Regularized empirical loss, computed in the literal sum form:
///   (1/n_q) sum w_q_i^2 [beta^T Phi(a^T x_i^q)]^2
///   - (2/n_p) sum w_p_i beta^T Phi(a^T x_i^p) + ridge |beta|^2.
/// May be negative; the dropped constant E_q[r*^2] is not included.
double empirical_loss(const Vector& a, const GaussianBasis& basis, const Vector& beta,
                      double ridge, const Vector& prev_weights_q,
                      const Vector& prev_weights_p, const SampleSet& x_q,
                      const SampleSet& x_p);

struct LossGrad {
  Vector a;      // d
  Vector gamma;  // J
};

/// Analytic gradients of empirical_loss in (a, gamma) with beta held fixed.
/// The ridge term is constant in (a, gamma) and does not contribute.
LossGrad loss_grad(const Vector& a, const GaussianBasis& basis, const Vector& beta,
                   double ridge, const Vector& prev_weights_q,
                   const Vector& prev_weights_p, const SampleSet& x_q,
                   const SampleSet& x_p);

/// Per-projection fit diagnostics: the loss at every beta-profiling point,
/// the number of optimizer steps taken, and center drift relative to the
/// initial projected-data range.
struct ProjectionDiag {
  std::vector<double> losses;
  int adam_steps = 0;
  bool converged = false;
  bool degenerate_centers = false;
  double gamma_min = 0.0;
  double gamma_max = 0.0;
};

/// Fit one more projection against the weights induced by prev_model:
/// alternate a closed-form beta profile with one Adam step on (a, gamma)
/// followed by renormalization of a, until the loss change over
/// rel_tol_window profiling points falls below rel_tol or max_inner_iters
/// steps were taken. Convergence is checked on the profiled loss. Throws
/// "degenerate projection" if the fitted factor is nonpositive on every
/// training input.
Projection fit_projection(const PPRatioModel& prev_model, const SampleSet& x_q,
                          const SampleSet& x_p, const FitConfig& cfg, SeededRng& rng,
                          ProjectionDiag* diag = nullptr);

/// Same, with the previous-model weights already evaluated on the samples;
/// incremental growth keeps these running products instead of re-evaluating
/// the whole model each round.
Projection fit_projection(const Vector& prev_weights_q, const Vector& prev_weights_p,
                          const SampleSet& x_q, const SampleSet& x_p,
                          const FitConfig& cfg, SeededRng& rng,
                          ProjectionDiag* diag = nullptr);

struct FitDiag {
  std::vector<ProjectionDiag> projections;
};

/// Fit K projections sequentially and canonicalize the result.
/// Deterministic per (cfg.seed, K).
PPRatioModel fit(const SampleSet& x_p, const SampleSet& x_q, const FitConfig& cfg,
                 Index k_count, FitDiag* diag = nullptr);

/// Hemisphere identification: if the first nonzero coordinate of a is
/// negative, replace (a, gamma) by (-a, -gamma) and reorder the centers
/// ascending (permuting beta alongside). The factor as a function of x is
/// unchanged. Idempotent.
Projection canonicalize(const Projection& proj);
PPRatioModel canonicalize(const PPRatioModel& model);

namespace detail {
/// Shared workspace used by the inner fitting loop; profile/loss/grad in
/// one pass over the design matrices.
struct ProfileWork {
  Matrix phi_q, zmg_q;  // n_q x J basis values and (z - gamma)
  Matrix phi_p, zmg_p;
  Matrix gram;          // J x J quadratic form, ridge included
  Vector rhs;           // W / n_p
  Vector beta;
  double loss = 0.0;

  void compute(const Vector& a, const Vector& gamma, double ridge, const Vector& w_q,
               const Vector& w_p, const Matrix& x_q, const Matrix& x_p);
  LossGrad gradients(const Vector& a, const Vector& w_q, const Vector& w_p,
                     const Matrix& x_q, const Matrix& x_p) const;
};
}  // namespace detail

}  // namespace ppdre
