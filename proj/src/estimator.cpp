#include "ppdre/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ppdre {

double PPRatioModel::evaluate(Eigen::Ref<const Vector> x) const {
  require(x.size() == d, "PPRatioModel::evaluate: dimension mismatch (expected " +
                             std::to_string(d) + ", got " + std::to_string(x.size()) + ")");
  double r = 1.0;
  for (const Projection& p : projections) r *= p.factor(p.a.dot(x));
  return r;
}

Vector PPRatioModel::evaluate_all(const Matrix& rows) const {
  require(rows.cols() == d, "PPRatioModel::evaluate_all: dimension mismatch");
  Vector out = Vector::Ones(rows.rows());
  for (const Projection& p : projections) {
    const Vector z = rows * p.a;
    for (Index i = 0; i < z.size(); ++i) {
      double f = p.factor(z(i));
      out(i) *= f;
    }
  }
  return out;
}

namespace detail {

void ProfileWork::compute(const Vector& a, const Vector& gamma, double ridge,
                          const Vector& w_q, const Vector& w_p, const Matrix& x_q,
                          const Matrix& x_p) {
  const Index n_q = x_q.rows();
  const Index n_p = x_p.rows();
  const Index j = gamma.size();
  const GaussianBasis basis{gamma};

  const Vector z_q = x_q * a;
  const Vector z_p = x_p * a;
  phi_q = basis.design(z_q, &zmg_q);
  phi_p = basis.design(z_p, &zmg_p);

  // Z = diag(w_q) Phi_q; gram = Z^T Z / n_q + ridge I.
  Matrix z_mat = w_q.asDiagonal() * phi_q;
  gram.resize(j, j);
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(z_mat.transpose(), 1.0 / double(n_q));
  gram.triangularView<Eigen::Upper>() = gram.transpose();
  gram.diagonal().array() += ridge;

  rhs.noalias() = phi_p.transpose() * w_p;
  rhs /= double(n_p);

  beta = spd_solve(gram, rhs);
  // At the profiled beta, gram * beta = rhs, so the quadratic form
  // collapses; keep the general expression so the loss is also valid for
  // non-profiled beta during tests.
  loss = beta.dot(gram.selfadjointView<Eigen::Lower>() * beta) - 2.0 * beta.dot(rhs);
}

LossGrad ProfileWork::gradients(const Vector& a, const Vector& w_q, const Vector& w_p,
                                const Matrix& x_q, const Matrix& x_p) const {
  const Index n_q = x_q.rows();
  const Index n_p = x_p.rows();

  const Vector g_q = phi_q * beta;                       // factor values on q
  const Vector g_p = phi_p * beta;                       // unused in grads, kept cheap
  (void)g_p;
  const Matrix dgamma_q = phi_q.cwiseProduct(zmg_q);     // d phi / d gamma entries
  const Matrix dgamma_p = phi_p.cwiseProduct(zmg_p);
  const Vector gprime_q = -(dgamma_q * beta);            // f'(z) on q
  const Vector gprime_p = -(dgamma_p * beta);

  const Vector wq2g = w_q.array().square() * g_q.array();

  LossGrad grad;
  grad.a = (2.0 / double(n_q)) * (x_q.transpose() * wq2g.cwiseProduct(gprime_q)) -
           (2.0 / double(n_p)) * (x_p.transpose() * w_p.cwiseProduct(gprime_p));
  grad.gamma = beta.cwiseProduct((2.0 / double(n_q)) * (dgamma_q.transpose() * wq2g) -
                                 (2.0 / double(n_p)) * (dgamma_p.transpose() * w_p));
  return grad;
}

}  // namespace detail

namespace {

void check_shapes(const Vector& a, const Vector& prev_weights_q,
                  const Vector& prev_weights_p, const SampleSet& x_q,
                  const SampleSet& x_p) {
  require(x_q.dim() == a.size() && x_p.dim() == a.size(),
          "projection direction dimension does not match the samples");
  require(prev_weights_q.size() == x_q.n() && prev_weights_p.size() == x_p.n(),
          "previous-weight vectors do not match the sample sizes");
}

}  // namespace

Vector profile_beta(const Vector& a, const GaussianBasis& basis, double ridge,
                    const Vector& prev_weights_q, const Vector& prev_weights_p,
                    const SampleSet& x_q, const SampleSet& x_p) {
  check_shapes(a, prev_weights_q, prev_weights_p, x_q, x_p);
  detail::ProfileWork work;
  try {
    work.compute(a, basis.centers(), ridge, prev_weights_q, prev_weights_p, x_q.x, x_p.x);
  } catch (const Error&) {
    if (ridge == 0.0) throw Error("profile_beta: singular profile system");
    throw;
  }
  return work.beta;
}

double empirical_loss(const Vector& a, const GaussianBasis& basis, const Vector& beta,
                      double ridge, const Vector& prev_weights_q,
                      const Vector& prev_weights_p, const SampleSet& x_q,
                      const SampleSet& x_p) {
  check_shapes(a, prev_weights_q, prev_weights_p, x_q, x_p);
  const Vector z_q = x_q.x * a;
  const Vector z_p = x_p.x * a;
  double term_q = 0.0;
  for (Index i = 0; i < z_q.size(); ++i) {
    const double f = basis.eval(z_q(i)).dot(beta);
    const double wf = prev_weights_q(i) * f;
    term_q += wf * wf;
  }
  double term_p = 0.0;
  for (Index i = 0; i < z_p.size(); ++i) {
    term_p += prev_weights_p(i) * basis.eval(z_p(i)).dot(beta);
  }
  return term_q / double(x_q.n()) - 2.0 * term_p / double(x_p.n()) +
         ridge * beta.squaredNorm();
}

LossGrad loss_grad(const Vector& a, const GaussianBasis& basis, const Vector& beta,
                   double ridge, const Vector& prev_weights_q,
                   const Vector& prev_weights_p, const SampleSet& x_q,
                   const SampleSet& x_p) {
  (void)ridge;  // constant in (a, gamma)
  check_shapes(a, prev_weights_q, prev_weights_p, x_q, x_p);
  detail::ProfileWork work;
  const GaussianBasis b = basis;
  const Vector z_q = x_q.x * a;
  const Vector z_p = x_p.x * a;
  work.phi_q = b.design(z_q, &work.zmg_q);
  work.phi_p = b.design(z_p, &work.zmg_p);
  work.beta = beta;
  return work.gradients(a, prev_weights_q, prev_weights_p, x_q.x, x_p.x);
}

namespace {

bool window_converged(const std::vector<double>& losses, int window, double rel_tol) {
  const std::size_t t = losses.size();
  if (t < static_cast<std::size_t>(window) + 1) return false;
  const double ref = losses[t - 1 - window];
  return std::abs(losses.back() - ref) <= rel_tol * (1.0 + std::abs(ref));
}

Projection fit_projection_weighted(const Vector& w_q, const Vector& w_p,
                                   const SampleSet& x_q, const SampleSet& x_p,
                                   const FitConfig& cfg, SeededRng& rng,
                                   ProjectionDiag* diag) {
  require(x_q.n() >= 2 && x_p.n() >= 2, "fit_projection: need at least two samples each");
  require(x_q.dim() == x_p.dim(), "fit_projection: sample dimensions differ");
  const Index d = x_q.dim();
  const Index j = cfg.basis_size;
  require(j >= 1, "fit_projection: basis size must be at least 1");

  // Random unit direction, then centers spread over the projected range
  // (q rows first, then p rows).
  Vector a(d);
  do {
    for (Index i = 0; i < d; ++i) a(i) = rng.normal();
  } while (a.norm() < 1e-12);
  a.normalize();

  Vector z_pool(x_q.n() + x_p.n());
  z_pool.head(x_q.n()) = x_q.x * a;
  z_pool.tail(x_p.n()) = x_p.x * a;
  CenterInit init = init_centers(rng, j, z_pool);
  Vector gamma = init.basis.centers();

  ProjectionDiag local_diag;
  local_diag.degenerate_centers = init.degenerate;

  AdamState adam = AdamState::zeros(d + j);
  detail::ProfileWork work;

  for (int t = 0;; ++t) {
    work.compute(a, gamma, cfg.ridge, w_q, w_p, x_q.x, x_p.x);
    if (!std::isfinite(work.loss)) throw Error("fit_projection: non-finite loss");
    local_diag.losses.push_back(work.loss);
    if (window_converged(local_diag.losses, cfg.rel_tol_window, cfg.rel_tol)) {
      local_diag.converged = true;
      break;
    }
    if (t >= cfg.max_inner_iters) break;

    const LossGrad grad = work.gradients(a, w_q, w_p, x_q.x, x_p.x);
    Vector params(d + j);
    params.head(d) = a;
    params.tail(j) = gamma;
    Vector g(d + j);
    g.head(d) = grad.a;
    g.tail(j) = grad.gamma;
    AdamResult step = adam_step(params, g, adam, cfg.learn_rate);
    adam = std::move(step.state);
    a = step.params.head(d);
    const double norm = a.norm();
    require(norm > 1e-12, "fit_projection: direction collapsed to zero");
    a /= norm;
    gamma = step.params.tail(j);
    local_diag.adam_steps = t + 1;
  }

  // Truncation floor: smallest positive factor value over the pooled
  // training inputs, q rows first.
  const Vector f_q = work.phi_q * work.beta;
  const Vector f_p = work.phi_p * work.beta;
  double floor = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < f_q.size(); ++i)
    if (f_q(i) > 0.0 && f_q(i) < floor) floor = f_q(i);
  for (Index i = 0; i < f_p.size(); ++i)
    if (f_p(i) > 0.0 && f_p(i) < floor) floor = f_p(i);
  if (!std::isfinite(floor))
    throw Error("fit_projection: degenerate projection (factor nonpositive on all "
                "training inputs)");

  local_diag.gamma_min = gamma.minCoeff();
  local_diag.gamma_max = gamma.maxCoeff();
  if (diag) *diag = std::move(local_diag);

  Projection proj;
  proj.a = a;
  proj.basis = GaussianBasis(gamma);
  proj.beta = work.beta;
  proj.floor = floor;
  return proj;
}

}  // namespace

Projection fit_projection(const PPRatioModel& prev_model, const SampleSet& x_q,
                          const SampleSet& x_p, const FitConfig& cfg, SeededRng& rng,
                          ProjectionDiag* diag) {
  const Vector w_q = prev_model.evaluate_all(x_q.x);
  const Vector w_p = prev_model.evaluate_all(x_p.x);
  return fit_projection_weighted(w_q, w_p, x_q, x_p, cfg, rng, diag);
}

Projection fit_projection(const Vector& prev_weights_q, const Vector& prev_weights_p,
                          const SampleSet& x_q, const SampleSet& x_p,
                          const FitConfig& cfg, SeededRng& rng, ProjectionDiag* diag) {
  require(prev_weights_q.size() == x_q.n() && prev_weights_p.size() == x_p.n(),
          "fit_projection: weight vectors do not match the sample sizes");
  return fit_projection_weighted(prev_weights_q, prev_weights_p, x_q, x_p, cfg, rng, diag);
}

PPRatioModel fit(const SampleSet& x_p, const SampleSet& x_q, const FitConfig& cfg,
                 Index k_count, FitDiag* diag) {
  require(x_p.n() >= 1 && x_q.n() >= 1, "fit: both samples must be nonempty");
  require(x_p.dim() == x_q.dim(), "fit: sample dimensions differ");
  require(k_count >= 0, "fit: K must be nonnegative");

  PPRatioModel model;
  model.d = x_p.dim();
  if (diag) diag->projections.clear();

  SeededRng root(cfg.seed);
  Vector w_q = Vector::Ones(x_q.n());
  Vector w_p = Vector::Ones(x_p.n());

  for (Index k = 0; k < k_count; ++k) {
    SeededRng rng_k = root.split(static_cast<std::uint64_t>(k));
    ProjectionDiag pd;
    Projection proj = fit_projection_weighted(w_q, w_p, x_q, x_p, cfg, rng_k,
                                              diag ? &pd : nullptr);
    proj = canonicalize(proj);
    if (diag) diag->projections.push_back(std::move(pd));

    const Vector z_q = x_q.x * proj.a;
    const Vector z_p = x_p.x * proj.a;
    for (Index i = 0; i < w_q.size(); ++i) {
      const double f = cfg.truncate_prev_weights ? proj.factor(z_q(i))
                                                 : proj.factor_raw(z_q(i));
      w_q(i) *= f;
    }
    for (Index i = 0; i < w_p.size(); ++i) {
      const double f = cfg.truncate_prev_weights ? proj.factor(z_p(i))
                                                 : proj.factor_raw(z_p(i));
      w_p(i) *= f;
    }
    model.projections.push_back(std::move(proj));
  }
  return model;
}

Projection canonicalize(const Projection& proj) {
  Index first_nonzero = -1;
  for (Index i = 0; i < proj.a.size(); ++i) {
    if (proj.a(i) != 0.0) {
      first_nonzero = i;
      break;
    }
  }
  if (first_nonzero < 0 || proj.a(first_nonzero) > 0.0) return proj;

  Projection out;
  out.a = -proj.a;
  out.floor = proj.floor;
  const Vector neg_gamma = -proj.basis.centers();
  std::vector<Index> order(neg_gamma.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index l, Index r) { return neg_gamma(l) < neg_gamma(r); });
  Vector gamma(neg_gamma.size()), beta(neg_gamma.size());
  for (Index i = 0; i < neg_gamma.size(); ++i) {
    gamma(i) = neg_gamma(order[i]);
    beta(i) = proj.beta(order[i]);
  }
  out.basis = GaussianBasis(std::move(gamma));
  out.beta = std::move(beta);
  return out;
}

PPRatioModel canonicalize(const PPRatioModel& model) {
  PPRatioModel out;
  out.d = model.d;
  out.projections.reserve(model.projections.size());
  for (const Projection& p : model.projections) out.projections.push_back(canonicalize(p));
  return out;
}

}  // namespace ppdre
