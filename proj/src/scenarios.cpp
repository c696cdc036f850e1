#include "ppdre/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ppdre/numerics.hpp"
#include "ppdre/rng.hpp"

namespace ppdre {

double normal_pdf(double v, double mean, double sd) {
  const double z = (v - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

namespace {

Matrix uniform_matrix(SeededRng& rng, Index n, Index d) {
  Matrix out(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) out(i, j) = rng.uniform();
  return out;
}

Vector normal_vector(SeededRng& rng, Index n) {
  Vector out(n);
  for (Index i = 0; i < n; ++i) out(i) = rng.normal();
  return out;
}

Vector permuted(const Vector& v, const std::vector<std::size_t>& perm) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i)
    out(i) = v(static_cast<Index>(perm[static_cast<std::size_t>(i)]));
  return out;
}

// Empirical quantile: order statistic at ceil(tau * m), 1-based.
double quantile(std::vector<double>& values, double tau) {
  const std::size_t m = values.size();
  const auto rank = static_cast<std::size_t>(
      std::min<double>(double(m) - 1.0,
                       std::max(0.0, std::ceil(tau * double(m)) - 1.0)));
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

}  // namespace

LabeledScenario gen_gaussian_pair(Index d, Index n_p, Index n_q, std::uint64_t seed) {
  require(d >= 1, "gen_gaussian_pair: d must be at least 1");
  SeededRng root(seed);
  SeededRng rng_p = root.split(0);
  SeededRng rng_q = root.split(1);

  LabeledScenario sc;
  sc.x_p = SampleSet(standard_normal(rng_p, n_p, d), Provenance::Numerator);
  sc.x_q = SampleSet(std::sqrt(2.0) * standard_normal(rng_q, n_q, d),
                     Provenance::Denominator);
  const double scale = std::pow(2.0, double(d) / 2.0);
  sc.ratio_truth = [scale](Eigen::Ref<const Vector> x) {
    return scale * std::exp(-x.squaredNorm() / 4.0);
  };
  sc.descriptor = "toy" + std::to_string(d) + "d(np=" + std::to_string(n_p) +
                  ";nq=" + std::to_string(n_q) + ";seed=" + std::to_string(seed) + ")";
  return sc;
}

LabeledScenario gen_stabilized_weights(const Vector& c, Index n, std::uint64_t seed) {
  require(n >= 2, "gen_stabilized_weights: n must be at least 2");
  const Index d_x = c.size();
  SeededRng root(seed);
  SeededRng rng_x = root.split(0);
  SeededRng rng_eps = root.split(1);
  SeededRng rng_perm = root.split(2);

  const Matrix x = standard_normal(rng_x, n, d_x);
  const Vector t = x * c + normal_vector(rng_eps, n);
  const Vector t_perm = permuted(t, rng_perm.permutation(static_cast<std::size_t>(n)));

  Matrix joint(n, d_x + 1);
  joint.col(0) = t;
  joint.rightCols(d_x) = x;
  Matrix product = joint;
  product.col(0) = t_perm;

  LabeledScenario sc;
  sc.x_q = SampleSet(std::move(joint), Provenance::Denominator);
  sc.x_p = SampleSet(std::move(product), Provenance::Numerator);
  const double marginal_sd = std::sqrt(1.0 + c.squaredNorm());
  const Vector c_copy = c;
  sc.ratio_truth = [c_copy, marginal_sd](Eigen::Ref<const Vector> row) {
    const double t_val = row(0);
    const double cond_mean = c_copy.dot(row.tail(c_copy.size()));
    return normal_pdf(t_val, 0.0, marginal_sd) / normal_pdf(t_val, cond_mean, 1.0);
  };
  sc.descriptor = "stabilized_weights(dx=" + std::to_string(d_x) +
                  ";n=" + std::to_string(n) + ";seed=" + std::to_string(seed) + ")";
  return sc;
}

LabeledScenario gen_mi_gaussian(Index p, double rho, Index n, std::uint64_t seed) {
  require(p >= 1, "gen_mi_gaussian: p must be at least 1");
  require(std::abs(rho) < 1.0, "gen_mi_gaussian: |rho| must be below 1");
  SeededRng root(seed);
  SeededRng rng_u = root.split(0);
  SeededRng rng_w = root.split(1);
  SeededRng rng_perm = root.split(2);

  const Matrix u = standard_normal(rng_u, n, p);
  const Matrix w = standard_normal(rng_w, n, p);
  const Matrix v = rho * u + std::sqrt(1.0 - rho * rho) * w;

  Matrix joint(n, 2 * p);
  joint.leftCols(p) = u;
  joint.rightCols(p) = v;
  const auto perm = rng_perm.permutation(static_cast<std::size_t>(n));
  Matrix product = joint;
  for (Index i = 0; i < n; ++i)
    product.row(i).tail(p) = v.row(static_cast<Index>(perm[static_cast<std::size_t>(i)]));

  LabeledScenario sc;
  sc.x_p = SampleSet(std::move(joint), Provenance::Numerator);
  sc.x_q = SampleSet(std::move(product), Provenance::Denominator);
  sc.scalar_truth = -(double(p) / 2.0) * std::log1p(-rho * rho);
  sc.descriptor = "mi_gaussian(p=" + std::to_string(p) + ";rho=" + std::to_string(rho) +
                  ";n=" + std::to_string(n) + ";seed=" + std::to_string(seed) + ")";
  return sc;
}

double DoseResponseData::time_part(double t) {
  return (1.2 - t * t) * std::sin(2.0 * std::numbers::pi * t - 2.0);
}

double DoseResponseData::shape(Eigen::Ref<const Vector> x_row) {
  // 1-based covariate indices 15..24 average into the tanh term.
  const double mean_i2 = x_row.segment(14, 10).mean();
  const double min_234 = std::min({x_row(1), x_row(2), x_row(3)});
  return 0.5 * std::tanh(5.0 * mean_i2) +
         1.5 * std::exp(0.2 * (x_row(0) - x_row(4)) / (0.1 + min_234));
}

double DoseResponseData::mu_tilde(Eigen::Ref<const Vector> x_row) {
  const double max_345 = std::max({x_row(2), x_row(3), x_row(4)});
  const double min_345 = std::min({x_row(2), x_row(3), x_row(4)});
  // 1-based covariate indices {3, 6..14} average into the tanh term.
  double sum_i1 = x_row(2);
  for (Index j = 5; j <= 13; ++j) sum_i1 += x_row(j);
  return x_row(0) / (1.0 + x_row(1)) + max_345 / (0.2 + min_345) +
         std::tanh(5.0 * sum_i1 / 10.0) - 2.0;
}

double DoseResponseData::adrf(double t) const {
  return time_part(t) * mc_shape.mean();
}

double DoseResponseData::qdrf(double t, double tau) const {
  require(tau > 0.0 && tau < 1.0, "qdrf: tau must lie in (0, 1)");
  const double tp = time_part(t);
  std::vector<double> vals(static_cast<std::size_t>(mc_shape.size()));
  for (Index i = 0; i < mc_shape.size(); ++i)
    vals[static_cast<std::size_t>(i)] = tp * mc_shape(i) + 0.5 * mc_eps(i);
  return quantile(vals, tau);
}

double DoseResponseData::stabilized_weight(double t, Eigen::Ref<const Vector> x_row) const {
  require(t > 0.0 && t < 1.0, "stabilized_weight: t must lie in (0, 1)");
  const double z = std::log((1.0 - t) / t);
  double marginal = 0.0;
  for (Index i = 0; i < mc_mu.size(); ++i) marginal += normal_pdf(z, mc_mu(i), 0.5);
  marginal /= double(mc_mu.size());
  return marginal / normal_pdf(z, mu_tilde(x_row), 0.5);
}

Vector DoseResponseData::sample_stabilized_weights() const {
  Vector w(t.size());
  for (Index i = 0; i < t.size(); ++i)
    w(i) = stabilized_weight(t(i), x.row(i).transpose());
  return w;
}

DoseResponseData gen_dose_response(Index n, std::uint64_t seed, Index mc_n) {
  require(n >= 2, "gen_dose_response: n must be at least 2");
  require(mc_n >= 10000, "gen_dose_response: oracle pool must have at least 1e4 draws");
  SeededRng root(seed);
  SeededRng rng_x = root.split(0);
  SeededRng rng_te = root.split(1);
  SeededRng rng_ye = root.split(2);
  // The oracle pool seed is fixed so truths do not move with the data seed.
  SeededRng oracle(derive_seed(0xD05EULL, mc_n));
  SeededRng rng_mcx = oracle.split(0);
  SeededRng rng_mce = oracle.split(1);

  DoseResponseData data;
  data.x = uniform_matrix(rng_x, n, 25);
  data.t.resize(n);
  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double tilde = DoseResponseData::mu_tilde(data.x.row(i).transpose()) +
                         0.5 * rng_te.normal();
    data.t(i) = 1.0 / (1.0 + std::exp(tilde));
    data.y(i) = DoseResponseData::time_part(data.t(i)) *
                    DoseResponseData::shape(data.x.row(i).transpose()) +
                0.5 * rng_ye.normal();
  }

  const Matrix mc_x = uniform_matrix(rng_mcx, mc_n, 25);
  data.mc_shape.resize(mc_n);
  data.mc_mu.resize(mc_n);
  for (Index i = 0; i < mc_n; ++i) {
    data.mc_shape(i) = DoseResponseData::shape(mc_x.row(i).transpose());
    data.mc_mu(i) = DoseResponseData::mu_tilde(mc_x.row(i).transpose());
  }
  data.mc_eps = normal_vector(rng_mce, mc_n);
  data.descriptor = "dose_response(n=" + std::to_string(n) +
                    ";mc=" + std::to_string(mc_n) + ";seed=" + std::to_string(seed) + ")";
  return data;
}

CovariateShiftSplit gen_covariate_shift(const Matrix& x, const Vector& y,
                                        std::uint64_t seed) {
  require(x.rows() >= 20, "gen_covariate_shift: need at least 20 rows");
  require(x.rows() == y.size(), "gen_covariate_shift: x and y row counts differ");
  const Index n = x.rows();
  const Index d = x.cols();
  const Vector mean = x.colwise().mean();
  SeededRng rng(seed);

  Vector omega(d);
  Vector proj;
  double sd = 0.0;
  int attempts = 0;
  for (; attempts < 10; ++attempts) {
    for (Index j = 0; j < d; ++j) omega(j) = rng.uniform(-1.0, 1.0);
    proj = (x.rowwise() - mean.transpose()) * omega;
    const double var = proj.squaredNorm() / double(n) - proj.mean() * proj.mean();
    sd = var > 0.0 ? std::sqrt(var) : 0.0;
    if (sd > 0.0) break;
  }
  require(sd > 0.0, "gen_covariate_shift: projection degenerate after 10 redraws");

  CovariateShiftSplit split;
  split.omega = omega;
  split.selection_prob.resize(n);
  std::vector<Index> train_idx, test_idx;
  for (Index i = 0; i < n; ++i) {
    const double v = 4.0 * proj(i) / sd;
    const double prob = 1.0 / (1.0 + std::exp(-v));
    split.selection_prob(i) = prob;
    if (rng.uniform() < prob)
      train_idx.push_back(i);
    else
      test_idx.push_back(i);
  }
  require(!train_idx.empty() && !test_idx.empty(),
          "gen_covariate_shift: one side of the split is empty");

  split.x_train.resize(static_cast<Index>(train_idx.size()), d);
  split.y_train.resize(static_cast<Index>(train_idx.size()));
  for (std::size_t i = 0; i < train_idx.size(); ++i) {
    split.x_train.row(static_cast<Index>(i)) = x.row(train_idx[i]);
    split.y_train(static_cast<Index>(i)) = y(train_idx[i]);
  }
  split.x_test.resize(static_cast<Index>(test_idx.size()), d);
  split.y_test.resize(static_cast<Index>(test_idx.size()));
  for (std::size_t i = 0; i < test_idx.size(); ++i) {
    split.x_test.row(static_cast<Index>(i)) = x.row(test_idx[i]);
    split.y_test(static_cast<Index>(i)) = y(test_idx[i]);
  }
  split.descriptor = "covariate_shift(seed=" + std::to_string(seed) + ")";
  return split;
}

RegressionData gen_friedman(Index n, double noise_sd, std::uint64_t seed) {
  require(n >= 1, "gen_friedman: n must be at least 1");
  SeededRng root(seed);
  SeededRng rng_x = root.split(0);
  SeededRng rng_e = root.split(1);

  RegressionData data;
  data.x = uniform_matrix(rng_x, n, 10);
  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& r = data.x.row(i);
    data.y(i) = 10.0 * std::sin(std::numbers::pi * r(0) * r(1)) +
                20.0 * (r(2) - 0.5) * (r(2) - 0.5) + 10.0 * r(3) + 5.0 * r(4);
    if (noise_sd > 0.0) data.y(i) += noise_sd * rng_e.normal();
  }
  data.descriptor = "friedman(n=" + std::to_string(n) + ";noise=" +
                    std::to_string(noise_sd) + ";seed=" + std::to_string(seed) + ")";
  return data;
}

}  // namespace ppdre
