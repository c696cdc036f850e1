#pragma once

#include <cstdint>

#include "ppdre/common.hpp"
#include "ppdre/rng.hpp"

namespace ppdre {

/// Solve A x = b for symmetric positive-definite A via an in-place
/// Cholesky factorization, followed by one step of iterative refinement.
/// Throws if A is not symmetric within sym_tol (relative to its largest
/// entry) or if a pivot is nonpositive; the error names the pivot index.
Vector spd_solve(const Matrix& a, const Vector& b, double sym_tol = 1e-10);

/// Moment state for the Adam optimizer.
struct AdamState {
  Vector m;  // first moment
  Vector v;  // second moment, entrywise >= 0
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros(Index n);
};

struct AdamResult {
  Vector params;
  AdamState state;
};

/// One bias-corrected Adam update. Pure: returns the new parameters and
/// state, inputs untouched. Throws on non-finite gradient entries.
AdamResult adam_step(const Vector& params, const Vector& grads, const AdamState& state,
                     double lr);

/// n x d matrix of i.i.d. standard normal draws, filled row by row.
Matrix standard_normal(SeededRng& rng, Index n, Index d);

}  // namespace ppdre
