#pragma once

#include "ppdre/common.hpp"
#include "ppdre/rng.hpp"

namespace ppdre {

/// Univariate Gaussian bump basis with unit bandwidth:
///   phi_j(z) = exp(-(z - gamma_j)^2 / 2).
/// The projection scale is adapted by the fit (through the direction and
/// the centers), not by a bandwidth parameter.
class GaussianBasis {
 public:
  GaussianBasis() = default;
  explicit GaussianBasis(Vector centers);

  Index size() const { return centers_.size(); }
  const Vector& centers() const { return centers_; }

  /// phi_j(z) for all j; entries lie in (0, 1].
  Vector eval(double z) const;
  /// d/dz phi_j(z) = -(z - gamma_j) phi_j(z).
  Vector eval_dz(double z) const;
  /// d/dgamma_j phi_j(z) = (z - gamma_j) phi_j(z) = -eval_dz.
  Vector eval_dgamma(double z) const;

  /// Design matrix: row i holds phi(z_i). If z_minus_gamma is given it
  /// receives (z_i - gamma_j), which the fit reuses for both derivative
  /// directions.
  Matrix design(const Vector& z, Matrix* z_minus_gamma = nullptr) const;

 private:
  Vector centers_;
};

struct CenterInit {
  GaussianBasis basis;
  bool degenerate = false;  // all projected values equal
};

/// J centers drawn uniformly over [min, max] of the projected values,
/// sorted ascending. A constant projection yields J identical centers and
/// the degenerate flag.
CenterInit init_centers(SeededRng& rng, Index j_count, const Vector& projected);

}  // namespace ppdre
