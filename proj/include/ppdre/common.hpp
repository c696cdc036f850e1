#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ppdre {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Pointwise density-ratio evaluator; the common currency between fitted
/// models, analytic truths, and the cross-validation engine.
using RatioFn = std::function<double(Eigen::Ref<const Vector>)>;

/// Error type for all contract violations in this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Which of the two densities a sample was drawn from.
enum class Provenance { Numerator, Denominator };

/// A set of i.i.d. observations from one distribution, one row per draw.
struct SampleSet {
  Matrix x;  // n x d
  Provenance tag = Provenance::Denominator;

  SampleSet() = default;
  SampleSet(Matrix rows, Provenance p) : x(std::move(rows)), tag(p) {}

  Index n() const { return x.rows(); }
  Index dim() const { return x.cols(); }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace ppdre
