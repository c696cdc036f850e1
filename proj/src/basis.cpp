#include "ppdre/basis.hpp"

#include <algorithm>

namespace ppdre {

GaussianBasis::GaussianBasis(Vector centers) : centers_(std::move(centers)) {
  require(centers_.size() >= 1, "GaussianBasis: needs at least one center");
  require(centers_.allFinite(), "GaussianBasis: centers must be finite");
}

Vector GaussianBasis::eval(double z) const {
  return (-0.5 * (z - centers_.array()).square()).exp();
}

Vector GaussianBasis::eval_dz(double z) const {
  const auto diff = z - centers_.array();
  return -diff * (-0.5 * diff.square()).exp();
}

Vector GaussianBasis::eval_dgamma(double z) const {
  const auto diff = z - centers_.array();
  return diff * (-0.5 * diff.square()).exp();
}

Matrix GaussianBasis::design(const Vector& z, Matrix* z_minus_gamma) const {
  const Index n = z.size();
  const Index j = centers_.size();
  Matrix d(n, j);
  d.colwise() = z;
  d.rowwise() -= centers_.transpose();
  Matrix phi = (-0.5 * d.array().square()).exp();
  if (z_minus_gamma) *z_minus_gamma = std::move(d);
  return phi;
}

CenterInit init_centers(SeededRng& rng, Index j_count, const Vector& projected) {
  require(j_count >= 1, "init_centers: J must be at least 1");
  require(projected.size() >= 2, "init_centers: need at least two projected values");
  const double lo = projected.minCoeff();
  const double hi = projected.maxCoeff();

  CenterInit out;
  if (lo == hi) {
    out.degenerate = true;
    out.basis = GaussianBasis(Vector::Constant(j_count, lo));
    return out;
  }
  Vector centers(j_count);
  for (Index j = 0; j < j_count; ++j) centers(j) = rng.uniform(lo, hi);
  std::sort(centers.begin(), centers.end());
  out.basis = GaussianBasis(std::move(centers));
  return out;
}

}  // namespace ppdre
