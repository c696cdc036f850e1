#include <doctest.h>

#include <cmath>

#include "ppdre/basis.hpp"

using namespace ppdre;

TEST_SUITE("basis") {

TEST_CASE("eval at the center is one") {
  GaussianBasis basis{(Vector(3) << -1.0, 0.4, 2.0).finished()};
  const Vector v = basis.eval(0.4);
  CHECK(v(1) == 1.0);
  CHECK(v(0) < 1.0);
}

TEST_CASE("eval two units from a center") {
  GaussianBasis basis{(Vector(1) << 1.5).finished()};
  CHECK(basis.eval(3.5)(0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("eval symmetric pair") {
  GaussianBasis basis{(Vector(2) << 0.0, 1.0).finished()};
  const Vector v = basis.eval(0.5);
  CHECK(v(0) == doctest::Approx(std::exp(-0.125)).epsilon(1e-14));
  CHECK(v(1) == doctest::Approx(std::exp(-0.125)).epsilon(1e-14));
}

TEST_CASE("eval range (0, 1]") {
  SeededRng rng(5);
  Vector centers(4);
  for (Index j = 0; j < 4; ++j) centers(j) = rng.uniform(-3, 3);
  std::sort(centers.begin(), centers.end());
  GaussianBasis basis{centers};
  // exp underflows to zero once |z - gamma| passes ~38.6; positivity is
  // checked on the range where doubles can represent the value.
  for (int i = 0; i < 200; ++i) {
    const Vector v = basis.eval(rng.uniform(-30, 30));
    CHECK(v.minCoeff() > 0.0);
    CHECK(v.maxCoeff() <= 1.0);
  }
}

TEST_CASE("eval_dz at the center is zero; analytic value elsewhere") {
  GaussianBasis basis{(Vector(2) << 0.0, 2.0).finished()};
  CHECK(basis.eval_dz(0.0)(0) == 0.0);
  CHECK(basis.eval_dz(1.0)(0) == doctest::Approx(-std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("eval_dgamma is the negated eval_dz") {
  SeededRng rng(17);
  for (int i = 0; i < 50; ++i) {
    Vector centers(3);
    for (Index j = 0; j < 3; ++j) centers(j) = rng.uniform(-4, 4);
    std::sort(centers.begin(), centers.end());
    GaussianBasis basis{centers};
    const double z = rng.uniform(-5, 5);
    CHECK((basis.eval_dgamma(z) + basis.eval_dz(z)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("derivatives match central finite differences") {
  SeededRng rng(99);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    Vector centers(2);
    centers << rng.uniform(-3, 3), rng.uniform(-3, 3);
    std::sort(centers.begin(), centers.end());
    GaussianBasis basis{centers};
    const double z = rng.uniform(-4, 4);

    const Vector fd_dz = (basis.eval(z + h) - basis.eval(z - h)) / (2 * h);
    CHECK((basis.eval_dz(z) - fd_dz).cwiseAbs().maxCoeff() <= 1e-6);

    for (Index j = 0; j < 2; ++j) {
      Vector cp = centers, cm = centers;
      cp(j) += h;
      cm(j) -= h;
      // Perturbing one center may break the ascending order; evaluate the
      // bump directly instead.
      const double fd = (std::exp(-0.5 * (z - cp(j)) * (z - cp(j))) -
                         std::exp(-0.5 * (z - cm(j)) * (z - cm(j)))) /
                        (2 * h);
      CHECK(std::abs(basis.eval_dgamma(z)(j) - fd) <= 1e-6);
    }
  }
}

TEST_CASE("design matrix matches rowwise eval") {
  SeededRng rng(1);
  Vector centers(3);
  centers << -1.0, 0.0, 2.5;
  GaussianBasis basis{centers};
  Vector z(4);
  z << -2.0, 0.0, 0.7, 3.0;
  Matrix zmg;
  const Matrix phi = basis.design(z, &zmg);
  for (Index i = 0; i < z.size(); ++i) {
    // The batched path may use a different exp vectorization; agreement is
    // to rounding, not bitwise.
    CHECK((phi.row(i).transpose() - basis.eval(z(i))).cwiseAbs().maxCoeff() <= 1e-15);
    for (Index j = 0; j < 3; ++j) CHECK(zmg(i, j) == z(i) - centers(j));
  }
}

TEST_CASE("init_centers stays in the projected range and sorts") {
  SeededRng rng(2);
  Vector projected(100);
  for (Index i = 0; i < 100; ++i) projected(i) = rng.uniform(-3, 3);
  SeededRng init_rng(77);
  const CenterInit init = init_centers(init_rng, 5, projected);
  CHECK(!init.degenerate);
  const Vector& c = init.basis.centers();
  for (Index j = 0; j < 5; ++j) {
    CHECK(c(j) >= projected.minCoeff());
    CHECK(c(j) <= projected.maxCoeff());
    if (j > 0) CHECK(c(j) >= c(j - 1));
  }
}

TEST_CASE("init_centers is deterministic per seed") {
  Vector projected(10);
  for (Index i = 0; i < 10; ++i) projected(i) = double(i) - 5.0;
  SeededRng a(3), b(3);
  CHECK(init_centers(a, 4, projected).basis.centers() ==
        init_centers(b, 4, projected).basis.centers());
}

TEST_CASE("init_centers flags a constant projection") {
  Vector projected = Vector::Constant(8, 1.25);
  SeededRng rng(4);
  const CenterInit init = init_centers(rng, 3, projected);
  CHECK(init.degenerate);
  CHECK((init.basis.centers().array() == 1.25).all());
}

}  // TEST_SUITE
