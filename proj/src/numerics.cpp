#include "ppdre/numerics.hpp"

#include <cmath>

namespace ppdre {

namespace {

// Lower Cholesky factor of a, in place. Throws naming the failing pivot.
void cholesky_inplace(Matrix& a) {
  const Index n = a.rows();
  for (Index j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (Index k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
    if (!(diag > 0.0)) {
      throw Error("spd_solve: not positive definite (pivot " + std::to_string(j) + ")");
    }
    const double ljj = std::sqrt(diag);
    a(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Index k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
  }
}

Vector cholesky_solve(const Matrix& l, const Vector& b) {
  const Index n = l.rows();
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    double s = b(i);
    for (Index k = 0; k < i; ++k) s -= l(i, k) * y(k);
    y(i) = s / l(i, i);
  }
  Vector x(n);
  for (Index i = n - 1; i >= 0; --i) {
    double s = y(i);
    for (Index k = i + 1; k < n; ++k) s -= l(k, i) * x(k);
    x(i) = s / l(i, i);
  }
  return x;
}

}  // namespace

Vector spd_solve(const Matrix& a, const Vector& b, double sym_tol) {
  require(a.rows() == a.cols(), "spd_solve: matrix must be square");
  require(a.rows() == b.size(), "spd_solve: dimension mismatch between A and b");
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  require(asym <= sym_tol * (1.0 + scale), "spd_solve: matrix is not symmetric");

  Matrix l = a;
  cholesky_inplace(l);
  Vector x = cholesky_solve(l, b);
  // One refinement step tightens the residual on ill-conditioned systems.
  const Vector r = b - a.selfadjointView<Eigen::Lower>() * x;
  x += cholesky_solve(l, r);
  return x;
}

AdamState AdamState::zeros(Index n) {
  AdamState s;
  s.m = Vector::Zero(n);
  s.v = Vector::Zero(n);
  return s;
}

AdamResult adam_step(const Vector& params, const Vector& grads, const AdamState& state,
                     double lr) {
  require(params.size() == grads.size() && params.size() == state.m.size() &&
              params.size() == state.v.size(),
          "adam_step: length mismatch");
  require(lr > 0.0, "adam_step: learning rate must be positive");
  if (!grads.allFinite()) throw Error("adam_step: non-finite gradient");

  AdamResult out;
  out.state = state;
  out.state.t = state.t + 1;
  out.state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  out.state.v = state.beta2 * state.v.array().matrix() +
                (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(out.state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(out.state.t));
  const Vector m_hat = out.state.m / bc1;
  const Vector v_hat = out.state.v / bc2;
  out.params =
      params.array() - lr * m_hat.array() / (v_hat.array().sqrt() + state.eps);
  return out;
}

Matrix standard_normal(SeededRng& rng, Index n, Index d) {
  require(n >= 1 && d >= 1, "standard_normal: n and d must be at least 1");
  Matrix out(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) out(i, j) = rng.normal();
  return out;
}

}  // namespace ppdre
