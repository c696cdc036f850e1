#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ppdre/estimator.hpp"
#include "ppdre/metrics.hpp"
#include "ppdre/scenarios.hpp"
#include "ppdre/serialize.hpp"

using namespace ppdre;

namespace {

struct TinyInstance {
  Vector a;
  GaussianBasis basis;
  Vector w_q, w_p;
  SampleSet x_q, x_p;
};

TinyInstance random_instance(SeededRng& rng, Index n, Index d, Index j) {
  TinyInstance inst;
  inst.a.resize(d);
  for (Index i = 0; i < d; ++i) inst.a(i) = rng.normal();
  inst.a.normalize();
  Vector centers(j);
  for (Index i = 0; i < j; ++i) centers(i) = rng.uniform(-1.5, 1.5);
  std::sort(centers.begin(), centers.end());
  inst.basis = GaussianBasis(centers);
  inst.x_q = SampleSet(standard_normal(rng, n, d), Provenance::Denominator);
  inst.x_p = SampleSet(standard_normal(rng, n, d), Provenance::Numerator);
  inst.w_q.resize(n);
  inst.w_p.resize(n);
  for (Index i = 0; i < n; ++i) {
    inst.w_q(i) = rng.uniform(0.5, 1.5);
    inst.w_p(i) = rng.uniform(0.5, 1.5);
  }
  return inst;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("profile_beta solves the scalar constant configuration by hand") {
  // All rows identical, J = 1, weights one, lambda = 0: the normal equation
  // is c^2 beta = c, so beta = 1/c with c the single basis value.
  const Index n = 4;
  Matrix rows = Matrix::Constant(n, 1, 0.7);
  SampleSet x_q(rows, Provenance::Denominator);
  SampleSet x_p(rows, Provenance::Numerator);
  Vector a(1);
  a << 1.0;
  GaussianBasis basis{(Vector(1) << 0.3).finished()};
  const double c = std::exp(-0.5 * 0.4 * 0.4);
  const Vector beta = profile_beta(a, basis, 0.0, Vector::Ones(n), Vector::Ones(n),
                                   x_q, x_p);
  CHECK(beta(0) == doctest::Approx(1.0 / c).epsilon(1e-12));
}

TEST_CASE("profile_beta shrinks monotonically with the ridge") {
  SeededRng rng(31);
  TinyInstance inst = random_instance(rng, 12, 2, 2);
  double prev_norm = std::numeric_limits<double>::infinity();
  for (double lambda : {0.5, 5.0, 50.0, 5000.0, 1e8}) {
    const Vector beta = profile_beta(inst.a, inst.basis, lambda, inst.w_q, inst.w_p,
                                     inst.x_q, inst.x_p);
    CHECK(beta.norm() < prev_norm);
    prev_norm = beta.norm();
  }
  CHECK(prev_norm < 1e-6);
}

TEST_CASE("profile_beta matches the brute-force grid oracle") {
  SeededRng rng(404);
  for (int trial = 0; trial < 5; ++trial) {
    TinyInstance inst = random_instance(rng, 6, 2, 2);
    const double lambda = 1.0;
    const Vector beta = profile_beta(inst.a, inst.basis, lambda, inst.w_q, inst.w_p,
                                     inst.x_q, inst.x_p);
    REQUIRE(beta.cwiseAbs().maxCoeff() < 4.0);  // interior of the oracle box
    const Vector oracle = testing::grid_minimize_beta(
        inst.a, inst.basis, lambda, inst.w_q, inst.w_p, inst.x_q.x, inst.x_p.x);
    CHECK((beta - oracle).cwiseAbs().maxCoeff() <= 2e-3);
  }
}

TEST_CASE("profile_beta first-order optimality") {
  SeededRng rng(88);
  TinyInstance inst = random_instance(rng, 20, 3, 4);
  for (double lambda : {0.5, 1.0, 5.0, 10.0}) {
    const Vector beta = profile_beta(inst.a, inst.basis, lambda, inst.w_q, inst.w_p,
                                     inst.x_q, inst.x_p);
    // Rebuild the quadratic from the definition and check the gradient.
    Matrix phi_q(inst.x_q.n(), inst.basis.size());
    for (Index i = 0; i < inst.x_q.n(); ++i)
      phi_q.row(i) =
          inst.w_q(i) *
          inst.basis.eval(inst.a.dot(inst.x_q.x.row(i).transpose())).transpose();
    Vector w_vec = Vector::Zero(inst.basis.size());
    for (Index i = 0; i < inst.x_p.n(); ++i)
      w_vec += inst.w_p(i) * inst.basis.eval(inst.a.dot(inst.x_p.x.row(i).transpose()));
    w_vec /= double(inst.x_p.n());
    const Matrix gram =
        phi_q.transpose() * phi_q / double(inst.x_q.n()) +
        lambda * Matrix::Identity(inst.basis.size(), inst.basis.size());
    const Vector grad = 2.0 * (gram * beta - w_vec);
    CHECK(grad.cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + w_vec.norm()));
  }
}

TEST_CASE("empirical_loss vanishes at beta = 0") {
  SeededRng rng(7);
  TinyInstance inst = random_instance(rng, 10, 2, 3);
  CHECK(empirical_loss(inst.a, inst.basis, Vector::Zero(3), 2.0, inst.w_q, inst.w_p,
                       inst.x_q, inst.x_p) == 0.0);
}

TEST_CASE("empirical_loss equals the expanded quadratic") {
  SeededRng rng(41);
  TinyInstance inst = random_instance(rng, 9, 2, 2);
  const double lambda = 1.5;
  Vector beta(2);
  beta << 0.8, -0.3;

  Matrix z(inst.x_q.n(), 2);
  for (Index i = 0; i < inst.x_q.n(); ++i)
    z.row(i) = inst.w_q(i) *
               inst.basis.eval(inst.a.dot(inst.x_q.x.row(i).transpose())).transpose();
  Vector w_vec = Vector::Zero(2);
  for (Index i = 0; i < inst.x_p.n(); ++i)
    w_vec += inst.w_p(i) * inst.basis.eval(inst.a.dot(inst.x_p.x.row(i).transpose()));
  const double quadratic =
      beta.dot((z.transpose() * z / double(inst.x_q.n()) +
                lambda * Matrix::Identity(2, 2)) *
               beta) -
      2.0 / double(inst.x_p.n()) * beta.dot(w_vec);

  const double direct = empirical_loss(inst.a, inst.basis, beta, lambda, inst.w_q,
                                       inst.w_p, inst.x_q, inst.x_p);
  CHECK(direct == doctest::Approx(quadratic).epsilon(1e-12));
}

TEST_CASE("profiled beta is a local minimizer of the loss") {
  SeededRng rng(55);
  TinyInstance inst = random_instance(rng, 8, 2, 2);
  const double lambda = 0.8;
  const Vector beta = profile_beta(inst.a, inst.basis, lambda, inst.w_q, inst.w_p,
                                   inst.x_q, inst.x_p);
  const double at_min = empirical_loss(inst.a, inst.basis, beta, lambda, inst.w_q,
                                       inst.w_p, inst.x_q, inst.x_p);
  for (int k = 0; k < 20; ++k) {
    Vector perturbed = beta;
    perturbed(k % 2) += (k % 3 == 0 ? 1 : -1) * 1e-3 * (1 + k);
    CHECK(empirical_loss(inst.a, inst.basis, perturbed, lambda, inst.w_q, inst.w_p,
                         inst.x_q, inst.x_p) >= at_min);
  }
}

TEST_CASE("loss_grad vanishes at beta = 0") {
  SeededRng rng(3);
  TinyInstance inst = random_instance(rng, 10, 3, 2);
  const LossGrad g = loss_grad(inst.a, inst.basis, Vector::Zero(2), 1.0, inst.w_q,
                               inst.w_p, inst.x_q, inst.x_p);
  CHECK(g.a.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.gamma.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("loss_grad matches central finite differences") {
  SeededRng rng(606);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    TinyInstance inst = random_instance(rng, 14, 3, 3);
    Vector beta(3);
    for (Index i = 0; i < 3; ++i) beta(i) = rng.uniform(-1, 1);
    const LossGrad g = loss_grad(inst.a, inst.basis, beta, 1.0, inst.w_q, inst.w_p,
                                 inst.x_q, inst.x_p);
    for (Index i = 0; i < 3; ++i) {
      Vector ap = inst.a, am = inst.a;
      ap(i) += h;
      am(i) -= h;
      const double fd = (testing::eq_loss_direct(ap, inst.basis, beta, 1.0, inst.w_q,
                                                 inst.w_p, inst.x_q.x, inst.x_p.x) -
                         testing::eq_loss_direct(am, inst.basis, beta, 1.0, inst.w_q,
                                                 inst.w_p, inst.x_q.x, inst.x_p.x)) /
                        (2 * h);
      CHECK(std::abs(g.a(i) - fd) <= 1e-4 * (1.0 + std::abs(fd)));
    }
    for (Index j = 0; j < 3; ++j) {
      Vector cp = inst.basis.centers(), cm = inst.basis.centers();
      cp(j) += h;
      cm(j) -= h;
      const double fd =
          (testing::eq_loss_direct(inst.a, GaussianBasis(cp), beta, 1.0, inst.w_q,
                                   inst.w_p, inst.x_q.x, inst.x_p.x) -
           testing::eq_loss_direct(inst.a, GaussianBasis(cm), beta, 1.0, inst.w_q,
                                   inst.w_p, inst.x_q.x, inst.x_p.x)) /
          (2 * h);
      CHECK(std::abs(g.gamma(j) - fd) <= 1e-4 * (1.0 + std::abs(fd)));
    }
  }
}

TEST_CASE("loss_grad is invariant to duplicating every sample") {
  SeededRng rng(21);
  TinyInstance inst = random_instance(rng, 7, 2, 2);
  Vector beta(2);
  beta << 0.4, 0.9;
  const LossGrad g1 = loss_grad(inst.a, inst.basis, beta, 1.0, inst.w_q, inst.w_p,
                                inst.x_q, inst.x_p);

  auto duplicate_rows = [](const Matrix& m) {
    Matrix out(2 * m.rows(), m.cols());
    out.topRows(m.rows()) = m;
    out.bottomRows(m.rows()) = m;
    return out;
  };
  auto duplicate_vec = [](const Vector& v) {
    Vector out(2 * v.size());
    out.head(v.size()) = v;
    out.tail(v.size()) = v;
    return out;
  };
  SampleSet x_q2(duplicate_rows(inst.x_q.x), Provenance::Denominator);
  SampleSet x_p2(duplicate_rows(inst.x_p.x), Provenance::Numerator);
  const LossGrad g2 = loss_grad(inst.a, inst.basis, beta, 1.0, duplicate_vec(inst.w_q),
                                duplicate_vec(inst.w_p), x_q2, x_p2);
  CHECK((g1.a - g2.a).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((g1.gamma - g2.gamma).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fit_projection on identical samples recovers a flat factor") {
  SeededRng data_rng(9000);
  const Matrix rows = standard_normal(data_rng, 400, 2);
  SampleSet x_q(rows, Provenance::Denominator);
  SampleSet x_p(rows, Provenance::Numerator);

  FitConfig cfg;
  cfg.basis_size = 10;
  cfg.ridge = 0.5;
  cfg.learn_rate = 0.05;
  cfg.max_inner_iters = 300;

  PPRatioModel none;
  none.d = 2;
  SeededRng rng(1);
  ProjectionDiag diag;
  const Projection proj = fit_projection(none, x_q, x_p, cfg, rng, &diag);

  CHECK(std::abs(proj.a.norm() - 1.0) <= 1e-12);
  const Vector z = rows * proj.a;
  double mean = 0.0;
  for (Index i = 0; i < z.size(); ++i) mean += proj.factor_raw(z(i));
  mean /= double(z.size());
  CHECK(mean > 0.8);
  CHECK(mean < 1.2);

  // The loss recorded at consecutive beta-profiling points should only
  // move down, up to the configured tolerance slack.
  for (std::size_t t = 1; t < diag.losses.size(); ++t) {
    CHECK(diag.losses[t] <=
          diag.losses[t - 1] + cfg.rel_tol * (1.0 + std::abs(diag.losses[t - 1])));
  }
}

TEST_CASE("fit with K = 0 is the constant-1 model") {
  SeededRng rng(2);
  SampleSet x_p(standard_normal(rng, 20, 3), Provenance::Numerator);
  SampleSet x_q(standard_normal(rng, 25, 3), Provenance::Denominator);
  FitConfig cfg;
  const PPRatioModel model = fit(x_p, x_q, cfg, 0);
  CHECK(model.k_count() == 0);
  Vector x(3);
  x << 5.0, -1.0, 0.2;
  CHECK(model.evaluate(x) == 1.0);
}

TEST_CASE("fit is bitwise deterministic per seed") {
  LabeledScenario sc = gen_gaussian_pair(2, 300, 300, 5);
  FitConfig cfg;
  cfg.basis_size = 8;
  cfg.max_inner_iters = 60;
  cfg.seed = 77;
  const PPRatioModel m1 = fit(sc.x_p, sc.x_q, cfg, 2);
  const PPRatioModel m2 = fit(sc.x_p, sc.x_q, cfg, 2);
  CHECK(to_json(m1) == to_json(m2));
}

TEST_CASE("fit recovers the 2-D Gaussian ratio at smoke scale") {
  LabeledScenario sc = gen_gaussian_pair(2, 1500, 1500, 11);
  FitConfig cfg;
  cfg.basis_size = 20;
  cfg.ridge = 0.5;
  cfg.learn_rate = 0.1;
  cfg.max_inner_iters = 400;
  cfg.seed = 3;
  const PPRatioModel model = fit(sc.x_p, sc.x_q, cfg, 3);
  Vector est(sc.x_q.n()), truth(sc.x_q.n());
  for (Index i = 0; i < sc.x_q.n(); ++i) {
    est(i) = model.evaluate(sc.x_q.x.row(i).transpose());
    truth(i) = sc.ratio_truth(sc.x_q.x.row(i).transpose());
  }
  CHECK(rmsle(est, truth) < 0.4);
}

TEST_CASE("evaluate truncates at the floor and multiplies factors") {
  Projection p1;
  p1.a = (Vector(2) << 1.0, 0.0).finished();
  p1.basis = GaussianBasis{(Vector(1) << 0.0).finished()};
  p1.beta = (Vector(1) << -2.0).finished();  // factor always negative
  p1.floor = 0.125;

  PPRatioModel model;
  model.d = 2;
  model.projections = {p1};
  Vector x(2);
  x << 0.3, 1.0;
  CHECK(model.evaluate(x) == 0.125);

  Projection p2 = p1;
  p2.beta(0) = 1.5;  // positive near the center
  model.projections = {p2, p1};
  const double expected = p2.factor(p2.a.dot(x)) * p1.factor(p1.a.dot(x));
  CHECK(model.evaluate(x) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(model.evaluate(x) >= p1.floor * p2.floor);

  Vector wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(model.evaluate(wrong), Error);
}

TEST_CASE("canonicalize flips the hemisphere and preserves evaluations") {
  Projection p;
  p.a = (Vector(2) << -1.0, 0.0).finished();
  p.basis = GaussianBasis{(Vector(1) << 0.5).finished()};
  p.beta = (Vector(1) << 1.3).finished();
  p.floor = 0.01;

  const Projection c = canonicalize(p);
  CHECK(c.a(0) == 1.0);
  CHECK(c.a(1) == 0.0);
  CHECK(c.basis.centers()(0) == -0.5);

  SeededRng rng(6);
  for (int i = 0; i < 20; ++i) {
    Vector x(2);
    x << rng.normal(), rng.normal();
    const double before = p.factor(p.a.dot(x));
    const double after = c.factor(c.a.dot(x));
    CHECK(std::abs(before - after) <= 1e-12);
  }

  // Idempotence and the identity branch.
  const Projection cc = canonicalize(c);
  CHECK(cc.a == c.a);
  CHECK(cc.basis.centers() == c.basis.centers());
  CHECK(cc.beta == c.beta);

  Projection multi;
  multi.a = (Vector(3) << 0.0, -0.8, 0.6).finished();
  multi.basis = GaussianBasis{(Vector(3) << -1.0, 0.0, 2.0).finished()};
  multi.beta = (Vector(3) << 1.0, 2.0, 3.0).finished();
  multi.floor = 0.5;
  const Projection cm = canonicalize(multi);
  CHECK(cm.a(1) == 0.8);  // first nonzero coordinate made positive
  // Centers negated and re-sorted ascending with beta carried along.
  CHECK(cm.basis.centers()(0) == -2.0);
  CHECK(cm.beta(0) == 3.0);
  CHECK(cm.beta(2) == 1.0);
  SeededRng rng2(8);
  for (int i = 0; i < 20; ++i) {
    Vector x(3);
    x << rng2.normal(), rng2.normal(), rng2.normal();
    CHECK(std::abs(multi.factor(multi.a.dot(x)) - cm.factor(cm.a.dot(x))) <= 1e-12);
  }
}

TEST_CASE("fitted models evaluate strictly positive everywhere") {
  LabeledScenario sc = gen_gaussian_pair(2, 400, 400, 13);
  FitConfig cfg;
  cfg.basis_size = 10;
  cfg.max_inner_iters = 150;
  cfg.seed = 5;
  const PPRatioModel model = fit(sc.x_p, sc.x_q, cfg, 2);
  double floor_product = 1.0;
  for (const auto& p : model.projections) {
    CHECK(p.floor > 0.0);
    CHECK(std::abs(p.a.norm() - 1.0) <= 1e-10);
    floor_product *= p.floor;
  }
  SeededRng rng(14);
  for (int i = 0; i < 100; ++i) {
    Vector x(2);
    x << rng.uniform(-30, 30), rng.uniform(-30, 30);
    const double r = model.evaluate(x);
    CHECK(r > 0.0);
    CHECK(r >= floor_product * (1.0 - 1e-12));
  }
}

}  // TEST_SUITE
