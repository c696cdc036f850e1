#pragma once

// Test-only oracles, independent of the library's solve paths: they
// evaluate the empirical loss by direct summation and minimize it by grid
// refinement, never through the closed-form system.

#include <vector>

#include "ppdre/basis.hpp"
#include "ppdre/common.hpp"

namespace ppdre::testing {

/// Regularized empirical loss by direct summation over the samples.
inline double eq_loss_direct(const Vector& a, const GaussianBasis& basis,
                             const Vector& beta, double ridge, const Vector& w_q,
                             const Vector& w_p, const Matrix& x_q, const Matrix& x_p) {
  double term_q = 0.0;
  for (Index i = 0; i < x_q.rows(); ++i) {
    const double f = basis.eval(a.dot(x_q.row(i).transpose())).dot(beta);
    term_q += (w_q(i) * f) * (w_q(i) * f);
  }
  double term_p = 0.0;
  for (Index i = 0; i < x_p.rows(); ++i)
    term_p += w_p(i) * basis.eval(a.dot(x_p.row(i).transpose())).dot(beta);
  return term_q / double(x_q.rows()) - 2.0 * term_p / double(x_p.rows()) +
         ridge * beta.squaredNorm();
}

/// Brute-force minimizer of the loss over beta in [lo, hi]^J (J <= 2):
/// a full coarse grid pass followed by a fine pass around the coarse
/// argmin. The loss is strictly convex in beta for ridge > 0, so the
/// refinement cannot lose the global grid minimizer.
inline Vector grid_minimize_beta(const Vector& a, const GaussianBasis& basis,
                                 double ridge, const Vector& w_q, const Vector& w_p,
                                 const Matrix& x_q, const Matrix& x_p, double lo = -5.0,
                                 double hi = 5.0, double coarse = 1e-2,
                                 double fine = 1e-3) {
  const Index j = basis.size();
  // Precompute basis rows once; the grid scan is then pure arithmetic.
  Matrix phi_q(x_q.rows(), j), phi_p(x_p.rows(), j);
  for (Index i = 0; i < x_q.rows(); ++i)
    phi_q.row(i) = basis.eval(a.dot(x_q.row(i).transpose())).transpose();
  for (Index i = 0; i < x_p.rows(); ++i)
    phi_p.row(i) = basis.eval(a.dot(x_p.row(i).transpose())).transpose();

  auto loss_of = [&](const Vector& beta) {
    double term_q = 0.0;
    for (Index i = 0; i < phi_q.rows(); ++i) {
      const double f = w_q(i) * phi_q.row(i).dot(beta);
      term_q += f * f;
    }
    double term_p = 0.0;
    for (Index i = 0; i < phi_p.rows(); ++i) term_p += w_p(i) * phi_p.row(i).dot(beta);
    return term_q / double(phi_q.rows()) - 2.0 * term_p / double(phi_p.rows()) +
           ridge * beta.squaredNorm();
  };

  auto scan = [&](const Vector& lo_v, const Vector& hi_v, double step) {
    Vector best = lo_v;
    double best_loss = std::numeric_limits<double>::infinity();
    Vector beta(j);
    if (j == 1) {
      for (double b0 = lo_v(0); b0 <= hi_v(0) + step / 2; b0 += step) {
        beta(0) = b0;
        const double l = loss_of(beta);
        if (l < best_loss) {
          best_loss = l;
          best = beta;
        }
      }
    } else {
      for (double b0 = lo_v(0); b0 <= hi_v(0) + step / 2; b0 += step) {
        beta(0) = b0;
        for (double b1 = lo_v(1); b1 <= hi_v(1) + step / 2; b1 += step) {
          beta(1) = b1;
          const double l = loss_of(beta);
          if (l < best_loss) {
            best_loss = l;
            best = beta;
          }
        }
      }
    }
    return best;
  };

  const Vector coarse_best =
      scan(Vector::Constant(j, lo), Vector::Constant(j, hi), coarse);
  const Vector fine_best = scan(coarse_best.array() - 5 * coarse,
                                coarse_best.array() + 5 * coarse, fine);
  return fine_best;
}

}  // namespace ppdre::testing
