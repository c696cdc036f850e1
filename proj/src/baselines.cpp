#include "ppdre/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ppdre/numerics.hpp"

namespace ppdre {

namespace {

// n x b matrix of kernel values against the centers.
Matrix kernel_design(const Matrix& rows, const Matrix& centers, double sigma) {
  const Vector row_sq = rows.rowwise().squaredNorm();
  const Vector cen_sq = centers.rowwise().squaredNorm();
  Matrix sq = -2.0 * (rows * centers.transpose());
  sq.colwise() += row_sq;
  sq.rowwise() += cen_sq.transpose();
  return (-sq.array() / (2.0 * sigma * sigma)).exp().cwiseMax(0.0);
}

double softplus(double m) {
  return std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m)));
}

}  // namespace

double gaussian_kernel(Eigen::Ref<const Vector> x, Eigen::Ref<const Vector> x2,
                       double sigma) {
  require(sigma > 0.0, "gaussian_kernel: sigma must be positive");
  require(x.size() == x2.size(), "gaussian_kernel: dimension mismatch");
  return std::exp(-(x - x2).squaredNorm() / (2.0 * sigma * sigma));
}

double KernelRatioModel::evaluate(Eigen::Ref<const Vector> x) const {
  require(x.size() == centers.cols(), "KernelRatioModel::evaluate: dimension mismatch");
  double v = 0.0;
  for (Index l = 0; l < centers.rows(); ++l)
    v += theta(l) * gaussian_kernel(x, centers.row(l).transpose(), sigma);
  return std::max(v, clamp_floor);
}

Vector KernelRatioModel::evaluate_all(const Matrix& rows) const {
  require(rows.cols() == centers.cols(),
          "KernelRatioModel::evaluate_all: dimension mismatch");
  return (kernel_design(rows, centers, sigma) * theta).cwiseMax(clamp_floor);
}

double LogisticRatioModel::evaluate(Eigen::Ref<const Vector> x) const {
  require(x.size() == w.size(), "LogisticRatioModel::evaluate: dimension mismatch");
  return prior * std::exp(w.dot(x) + intercept);
}

Vector LogisticRatioModel::evaluate_all(const Matrix& rows) const {
  require(rows.cols() == w.size(), "LogisticRatioModel::evaluate_all: dimension mismatch");
  return (prior * ((rows * w).array() + intercept).exp()).matrix();
}

Matrix draw_centers(const SampleSet& x_p, Index b, SeededRng& rng) {
  require(b >= 1 && b <= x_p.n(), "draw_centers: need 1 <= b <= n_p");
  std::vector<std::size_t> idx(static_cast<std::size_t>(x_p.n()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Partial Fisher-Yates: the first b entries are a uniform subset.
  for (Index i = 0; i < b; ++i) {
    const auto j = i + static_cast<Index>(rng.uniform_int(
                           static_cast<std::uint64_t>(x_p.n() - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Matrix centers(b, x_p.dim());
  for (Index i = 0; i < b; ++i) centers.row(i) = x_p.x.row(static_cast<Index>(idx[i]));
  return centers;
}

double median_pairwise_distance(const SampleSet& x_p, const SampleSet& x_q, Index cap) {
  const Index m_p = std::min(cap, x_p.n());
  const Index m_q = std::min(cap, x_q.n());
  Matrix pool(m_p + m_q, x_p.dim());
  pool.topRows(m_p) = x_p.x.topRows(m_p);
  pool.bottomRows(m_q) = x_q.x.topRows(m_q);
  const Index m = pool.rows();
  require(m >= 2, "median_pairwise_distance: need at least two rows");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j)
      dist.push_back((pool.row(i) - pool.row(j)).norm());
  auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return *mid > 0.0 ? *mid : 1.0;
}

KernelRatioModel ulsif_fit(const SampleSet& x_p, const SampleSet& x_q, double sigma,
                           double lambda, Index b, std::uint64_t seed) {
  require(sigma > 0.0 && lambda > 0.0, "ulsif_fit: sigma and lambda must be positive");
  SeededRng rng(seed);
  KernelRatioModel model;
  model.method = "ulsif";
  model.sigma = sigma;
  model.clamp_floor = 0.0;
  model.centers = draw_centers(x_p, b, rng);

  const Matrix psi_q = kernel_design(x_q.x, model.centers, sigma);
  const Matrix psi_p = kernel_design(x_p.x, model.centers, sigma);
  Matrix h_hat(b, b);
  h_hat.setZero();
  h_hat.selfadjointView<Eigen::Lower>().rankUpdate(psi_q.transpose(),
                                                   1.0 / double(x_q.n()));
  h_hat.triangularView<Eigen::Upper>() = h_hat.transpose();
  h_hat.diagonal().array() += lambda;
  const Vector h_vec = psi_p.colwise().mean();

  model.theta_raw = spd_solve(h_hat, h_vec);
  model.theta = model.theta_raw.cwiseMax(0.0);
  return model;
}

KernelRatioModel kliep_fit(const SampleSet& x_p, const SampleSet& x_q, double sigma,
                           Index b, double step, int iters, std::uint64_t seed) {
  require(sigma > 0.0, "kliep_fit: sigma must be positive");
  require(step > 0.0 && iters >= 1, "kliep_fit: need a positive step and iters");
  SeededRng rng(seed);
  KernelRatioModel model;
  model.method = "kliep";
  model.sigma = sigma;
  model.clamp_floor = 1e-12;
  model.centers = draw_centers(x_p, b, rng);

  const Matrix psi_p = kernel_design(x_p.x, model.centers, sigma);
  const Vector u = kernel_design(x_q.x, model.centers, sigma).colwise().mean();
  const double u_sq = u.squaredNorm();
  require(u_sq > 0.0, "kliep_fit: q-sample kernel means vanish");

  bool clipped = false;
  auto objective = [&](const Vector& theta) {
    const Vector vals = psi_p * theta;
    double obj = 0.0;
    for (Index i = 0; i < vals.size(); ++i) {
      double v = vals(i);
      if (v <= 0.0) {
        v = 1e-12;
        clipped = true;
      }
      obj += std::log(v);
    }
    return obj / double(x_p.n());
  };
  auto project = [&](Vector theta) {
    theta += ((1.0 - u.dot(theta)) / u_sq) * u;
    theta = theta.cwiseMax(0.0);
    const double s = u.dot(theta);
    require(s > 0.0, "kliep_fit: constraint projection collapsed");
    return Vector(theta / s);
  };

  Vector theta = project(Vector::Ones(b));
  double obj = objective(theta);
  double eps = step;
  for (int it = 0; it < iters && eps > 1e-12; ++it) {
    Vector vals = (psi_p * theta).cwiseMax(1e-12);
    const Vector grad = psi_p.transpose() * vals.cwiseInverse() / double(x_p.n());
    const Vector cand = project(theta + eps * grad);
    const double cand_obj = objective(cand);
    if (cand_obj >= obj) {
      theta = cand;
      obj = cand_obj;
    } else {
      eps *= 0.5;
    }
  }
  model.theta = theta;
  model.theta_raw = theta;
  model.log_clip_flagged = clipped;
  return model;
}

LogisticRatioModel logistic_ratio_fit(const SampleSet& x_p, const SampleSet& x_q,
                                      double lr, int iters, std::uint64_t seed) {
  (void)seed;  // zero-init full-batch descent is already deterministic
  require(x_p.n() >= 1 && x_q.n() >= 1, "logistic_ratio_fit: empty sample");
  require(x_p.dim() == x_q.dim(), "logistic_ratio_fit: dimension mismatch");
  require(lr > 0.0 && iters >= 1, "logistic_ratio_fit: need a positive lr and iters");
  const Index n_p = x_p.n();
  const Index n_q = x_q.n();
  const Index n = n_p + n_q;
  const Index d = x_p.dim();

  LogisticRatioModel model;
  model.prior = double(n_q) / double(n_p);
  model.w = Vector::Zero(d);
  model.intercept = 0.0;

  constexpr double kMaxNorm = 50.0;
  Vector margins(n);
  for (int it = 0; it < iters; ++it) {
    margins.head(n_p) = x_p.x * model.w;
    margins.head(n_p).array() += model.intercept;
    margins.tail(n_q) = x_q.x * model.w;
    margins.tail(n_q).array() += model.intercept;

    // y = +1 on the p block, -1 on the q block.
    double loss = 0.0;
    Vector grad_w = Vector::Zero(d);
    double grad_b = 0.0;
    for (Index i = 0; i < n_p; ++i) {
      loss += softplus(-margins(i));
      const double s = -1.0 / (1.0 + std::exp(margins(i)));
      grad_w += s * x_p.x.row(i).transpose();
      grad_b += s;
    }
    for (Index i = 0; i < n_q; ++i) {
      loss += softplus(margins(n_p + i));
      const double s = 1.0 / (1.0 + std::exp(-margins(n_p + i)));
      grad_w += s * x_q.x.row(i).transpose();
      grad_b += s;
    }
    loss /= double(n);
    model.w -= (lr / double(n)) * grad_w;
    model.intercept -= (lr / double(n)) * grad_b;
    const double norm = model.w.norm();
    if (norm > kMaxNorm) model.w *= kMaxNorm / norm;
    if (loss < 1e-6) {
      model.separation_warning = true;
      break;
    }
  }
  return model;
}

}  // namespace ppdre
