#pragma once

#include <optional>
#include <string>

#include "ppdre/baselines.hpp"
#include "ppdre/estimator.hpp"

namespace ppdre {

/// JSON document for a fitted projection-pursuit model: fields d, K, and
/// per-projection a / gamma / beta / floor arrays. Doubles round-trip
/// value-exactly.
std::string to_json(const PPRatioModel& model);
PPRatioModel pp_model_from_json(const std::string& text);

/// Same envelope with a method tag for the baselines.
std::string to_json(const KernelRatioModel& model);
KernelRatioModel kernel_model_from_json(const std::string& text);

std::string to_json(const LogisticRatioModel& model);
LogisticRatioModel logistic_model_from_json(const std::string& text);

/// A deserialized model of any supported method.
struct AnyRatioModel {
  std::string method;
  std::optional<PPRatioModel> pp;
  std::optional<KernelRatioModel> kernel;
  std::optional<LogisticRatioModel> logistic;

  Index dim() const;
  double evaluate(Eigen::Ref<const Vector> x) const;
  Vector evaluate_all(const Matrix& rows) const;
};

AnyRatioModel model_from_json(const std::string& text);

void save_model_file(const std::string& json_text, const std::string& path);
AnyRatioModel load_model_file(const std::string& path);

}  // namespace ppdre
