#include "ppdre/applications.hpp"

#include <cmath>

#include "ppdre/numerics.hpp"
#include "ppdre/rng.hpp"

namespace ppdre {

double estimate_mi(const RatioFn& ratio, const Matrix& joint_rows) {
  require(joint_rows.rows() >= 1, "estimate_mi: empty joint sample");
  double sum = 0.0;
  for (Index i = 0; i < joint_rows.rows(); ++i) {
    const double r = ratio(joint_rows.row(i).transpose());
    if (!(r > 0.0))
      throw Error("estimate_mi: nonpositive ratio evaluation at row " + std::to_string(i));
    sum += std::log(r);
  }
  return sum / double(joint_rows.rows());
}

double DoseResponseFit::operator()(double t) const {
  double acc = 0.0;
  double power = 1.0;
  for (int k = 0; k < 5; ++k) {
    acc += theta(k) * power;
    power *= t;
  }
  return acc;
}

namespace {

Matrix quartic_design(const Vector& t) {
  Matrix b(t.size(), 5);
  b.col(0).setOnes();
  for (int k = 1; k < 5; ++k) b.col(k) = b.col(k - 1).cwiseProduct(t);
  return b;
}

// Pinball loss with the kink replaced by a quadratic on [-h, h]; C^1.
double smoothed_pinball(double v, double tau, double h) {
  if (v > h) return tau * v;
  if (v < -h) return (tau - 1.0) * v;
  return v * v / (4.0 * h) + (tau - 0.5) * v + h / 4.0;
}

double smoothed_pinball_deriv(double v, double tau, double h) {
  if (v > h) return tau;
  if (v < -h) return tau - 1.0;
  return v / (2.0 * h) + tau - 0.5;
}

}  // namespace

DoseResponseFit fit_adrf(const Vector& t, const Vector& y, const Vector& weights) {
  require(t.size() == y.size() && t.size() == weights.size(),
          "fit_adrf: length mismatch");
  require(weights.minCoeff() >= 0.0, "fit_adrf: weights must be nonnegative");
  require(weights.maxCoeff() > 0.0, "fit_adrf: weights must not all vanish");

  const Matrix b = quartic_design(t);
  Matrix normal = b.transpose() * weights.asDiagonal() * b;
  normal.diagonal().array() += 1e-10;
  const Vector rhs = b.transpose() * weights.cwiseProduct(y);

  DoseResponseFit fit;
  fit.loss = DoseResponseFit::Loss::Squared;
  Vector theta;
  try {
    theta = spd_solve(normal, rhs);
  } catch (const Error&) {
    throw Error("fit_adrf: rank-deficient quartic design");
  }
  fit.theta = theta;
  const Vector resid = y - b * theta;
  fit.final_loss = resid.cwiseProduct(weights).dot(resid) / weights.sum();
  return fit;
}

DoseResponseFit fit_qdrf(const Vector& t, const Vector& y, const Vector& weights,
                         double tau, double smoothing_h, double lr, int iters) {
  require(t.size() == y.size() && t.size() == weights.size(),
          "fit_qdrf: length mismatch");
  require(tau > 0.0 && tau < 1.0, "fit_qdrf: tau must lie in (0, 1)");
  require(smoothing_h > 0.0, "fit_qdrf: smoothing width must be positive");
  require(lr > 0.0 && iters >= 1, "fit_qdrf: need a positive lr and iters");

  const Matrix b = quartic_design(t);
  const double w_sum = weights.sum();
  require(w_sum > 0.0, "fit_qdrf: weights must not all vanish");

  auto loss_at = [&](const Vector& theta) {
    const Vector v = y - b * theta;
    double acc = 0.0;
    for (Index i = 0; i < v.size(); ++i)
      acc += weights(i) * smoothed_pinball(v(i), tau, smoothing_h);
    return acc / w_sum;
  };

  Vector theta = fit_adrf(t, y, weights).theta;
  double best_loss = loss_at(theta);
  Vector best_theta = theta;

  AdamState adam = AdamState::zeros(5);
  for (int it = 0; it < iters; ++it) {
    const Vector v = y - b * theta;
    Vector grad = Vector::Zero(5);
    for (Index i = 0; i < v.size(); ++i) {
      const double dl = -weights(i) * smoothed_pinball_deriv(v(i), tau, smoothing_h);
      grad += dl * b.row(i).transpose();
    }
    grad /= w_sum;
    AdamResult step = adam_step(theta, grad, adam, lr);
    adam = std::move(step.state);
    theta = std::move(step.params);
    const double loss = loss_at(theta);
    if (loss > 1e6) throw Error("fit_qdrf: optimization diverged");
    if (loss < best_loss) {
      best_loss = loss;
      best_theta = theta;
    }
  }

  DoseResponseFit fit;
  fit.loss = DoseResponseFit::Loss::Pinball;
  fit.tau = tau;
  fit.theta = best_theta;
  fit.final_loss = best_loss;
  return fit;
}

namespace {

Matrix krr_gram(const Matrix& a, const Matrix& b) {
  const double d = double(a.cols());
  const Vector a_sq = a.rowwise().squaredNorm();
  const Vector b_sq = b.rowwise().squaredNorm();
  Matrix sq = -2.0 * (a * b.transpose());
  sq.colwise() += a_sq;
  sq.rowwise() += b_sq.transpose();
  return (-sq.array() / d).exp();
}

}  // namespace

double KRRModel::predict(Eigen::Ref<const Vector> x) const {
  require(x.size() == x_train.cols(), "KRRModel::predict: dimension mismatch");
  double acc = 0.0;
  const double d = double(x_train.cols());
  for (Index i = 0; i < x_train.rows(); ++i) {
    const double sq = (x_train.row(i).transpose() - x).squaredNorm();
    acc += theta(i) * std::exp(-sq / d);
  }
  return acc;
}

Vector KRRModel::predict_all(const Matrix& rows) const {
  require(rows.cols() == x_train.cols(), "KRRModel::predict_all: dimension mismatch");
  return krr_gram(rows, x_train) * theta;
}

KRRModel krr_fit(const Matrix& x_train, const Vector& y_train, const Vector& weights,
                 double lambda) {
  require(x_train.rows() == y_train.size() && x_train.rows() == weights.size(),
          "krr_fit: length mismatch");
  require(lambda > 0.0, "krr_fit: lambda must be positive");
  require(weights.minCoeff() >= 0.0, "krr_fit: weights must be nonnegative");
  const Index n = x_train.rows();
  const double s = weights.sum() / double(n);
  require(s > 0.0, "krr_fit: weights must not all vanish");

  const Matrix k = krr_gram(x_train, x_train);
  const Matrix kw = k * (weights / double(n)).asDiagonal();
  Matrix lhs = kw * k;
  // K W K picks up rounding asymmetry; the system is symmetric by
  // construction, so restore it exactly before factorizing.
  lhs = 0.5 * (lhs + lhs.transpose()).eval();
  lhs.diagonal().array() += lambda * s;
  const Vector rhs = kw * y_train;

  KRRModel model;
  model.x_train = x_train;
  model.lambda = lambda;
  model.theta = spd_solve(lhs, rhs);
  return model;
}

double krr_select_lambda(const Matrix& x_train, const Vector& y_train,
                         const Vector& weights, std::uint64_t seed,
                         const std::vector<double>& grid) {
  require(!grid.empty(), "krr_select_lambda: empty grid");
  const Index n = x_train.rows();
  require(n >= 10, "krr_select_lambda: need at least 10 rows");
  const int k = 5;
  SeededRng rng(seed);
  const auto perm = rng.permutation(static_cast<std::size_t>(n));
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (Index pos = 0; pos < n; ++pos)
    fold[perm[static_cast<std::size_t>(pos)]] = static_cast<int>(pos % k);

  double best_err = std::numeric_limits<double>::infinity();
  double best_lambda = grid.front();
  for (double lambda : grid) {
    double err = 0.0;
    for (int f = 0; f < k; ++f) {
      std::vector<Index> tr, va;
      for (Index i = 0; i < n; ++i)
        (fold[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
      Matrix x_tr(static_cast<Index>(tr.size()), x_train.cols());
      Vector y_tr(static_cast<Index>(tr.size())), w_tr(static_cast<Index>(tr.size()));
      for (std::size_t i = 0; i < tr.size(); ++i) {
        x_tr.row(static_cast<Index>(i)) = x_train.row(tr[i]);
        y_tr(static_cast<Index>(i)) = y_train(tr[i]);
        w_tr(static_cast<Index>(i)) = weights(tr[i]);
      }
      if (w_tr.maxCoeff() <= 0.0) continue;
      const KRRModel model = krr_fit(x_tr, y_tr, w_tr, lambda);
      double fold_err = 0.0, fold_w = 0.0;
      for (Index i : va) {
        const double pred = model.predict(x_train.row(i).transpose());
        fold_err += weights(i) * (pred - y_train(i)) * (pred - y_train(i));
        fold_w += weights(i);
      }
      if (fold_w > 0.0) err += fold_err / fold_w;
    }
    if (err < best_err) {
      best_err = err;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace ppdre
