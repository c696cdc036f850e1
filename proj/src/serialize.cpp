#include "ppdre/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ppdre {

namespace {

using nlohmann::json;

json vec_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vec_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw Error("model json: '" + what + "' must be an array");
  Vector v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw Error("model json: '" + what + "' has a non-number");
    v(static_cast<Index>(i)) = arr[i].get<double>();
  }
  return v;
}

json parse(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error("model json: parse error");
  if (!doc.is_object()) throw Error("model json: top level must be an object");
  return doc;
}

std::string method_of(const json& doc) {
  if (!doc.contains("method") || !doc["method"].is_string())
    throw Error("model json: missing method tag");
  return doc["method"].get<std::string>();
}

json envelope(const std::string& method) {
  json doc;
  doc["format"] = "density-ratio-model";
  doc["version"] = 1;
  doc["method"] = method;
  return doc;
}

}  // namespace

std::string to_json(const PPRatioModel& model) {
  json doc = envelope("ppdre");
  doc["d"] = model.d;
  doc["K"] = model.k_count();
  json projections = json::array();
  for (const Projection& p : model.projections) {
    json jp;
    jp["a"] = vec_to_json(p.a);
    jp["gamma"] = vec_to_json(p.basis.centers());
    jp["beta"] = vec_to_json(p.beta);
    jp["floor"] = p.floor;
    projections.push_back(std::move(jp));
  }
  doc["projections"] = std::move(projections);
  return doc.dump(2);
}

PPRatioModel pp_model_from_json(const std::string& text) {
  const json doc = parse(text);
  if (method_of(doc) != "ppdre") throw Error("model json: not a ppdre model");
  PPRatioModel model;
  model.d = doc.at("d").get<Index>();
  const json& projections = doc.at("projections");
  if (!projections.is_array()) throw Error("model json: 'projections' must be an array");
  if (doc.at("K").get<Index>() != static_cast<Index>(projections.size()))
    throw Error("model json: K does not match the projection count");
  for (const json& jp : projections) {
    Projection p;
    p.a = vec_from_json(jp.at("a"), "a");
    p.beta = vec_from_json(jp.at("beta"), "beta");
    p.basis = GaussianBasis(vec_from_json(jp.at("gamma"), "gamma"));
    p.floor = jp.at("floor").get<double>();
    require(p.a.size() == model.d, "model json: projection dimension mismatch");
    require(std::abs(p.a.norm() - 1.0) <= 1e-10, "model json: direction is not unit");
    require(p.floor > 0.0, "model json: floor must be positive");
    require(p.beta.allFinite(), "model json: beta must be finite");
    require(p.beta.size() == p.basis.size(), "model json: beta/gamma length mismatch");
    model.projections.push_back(std::move(p));
  }
  return model;
}

std::string to_json(const KernelRatioModel& model) {
  json doc = envelope(model.method);
  doc["sigma"] = model.sigma;
  doc["clamp_floor"] = model.clamp_floor;
  doc["log_clip_flagged"] = model.log_clip_flagged;
  doc["theta"] = vec_to_json(model.theta);
  json centers = json::array();
  for (Index i = 0; i < model.centers.rows(); ++i)
    centers.push_back(vec_to_json(model.centers.row(i).transpose()));
  doc["centers"] = std::move(centers);
  return doc.dump(2);
}

KernelRatioModel kernel_model_from_json(const std::string& text) {
  const json doc = parse(text);
  const std::string method = method_of(doc);
  if (method != "ulsif" && method != "kliep")
    throw Error("model json: not a kernel ratio model");
  KernelRatioModel model;
  model.method = method;
  model.sigma = doc.at("sigma").get<double>();
  model.clamp_floor = doc.at("clamp_floor").get<double>();
  model.log_clip_flagged = doc.value("log_clip_flagged", false);
  model.theta = vec_from_json(doc.at("theta"), "theta");
  model.theta_raw = model.theta;
  const json& centers = doc.at("centers");
  if (!centers.is_array() || centers.empty())
    throw Error("model json: centers must be a nonempty array");
  const Index b = static_cast<Index>(centers.size());
  const Index d = static_cast<Index>(centers[0].size());
  model.centers.resize(b, d);
  for (Index i = 0; i < b; ++i) {
    const Vector row = vec_from_json(centers[static_cast<std::size_t>(i)], "centers");
    require(row.size() == d, "model json: ragged centers");
    model.centers.row(i) = row.transpose();
  }
  require(model.sigma > 0.0, "model json: sigma must be positive");
  require(model.theta.size() == b, "model json: theta/centers length mismatch");
  require(model.theta.minCoeff() >= 0.0, "model json: theta must be nonnegative");
  return model;
}

std::string to_json(const LogisticRatioModel& model) {
  json doc = envelope("logistic");
  doc["w"] = vec_to_json(model.w);
  doc["intercept"] = model.intercept;
  doc["prior"] = model.prior;
  doc["separation_warning"] = model.separation_warning;
  return doc.dump(2);
}

LogisticRatioModel logistic_model_from_json(const std::string& text) {
  const json doc = parse(text);
  if (method_of(doc) != "logistic") throw Error("model json: not a logistic model");
  LogisticRatioModel model;
  model.w = vec_from_json(doc.at("w"), "w");
  model.intercept = doc.at("intercept").get<double>();
  model.prior = doc.at("prior").get<double>();
  model.separation_warning = doc.value("separation_warning", false);
  require(model.w.allFinite() && std::isfinite(model.intercept) &&
              std::isfinite(model.prior) && model.prior > 0.0,
          "model json: logistic parameters must be finite");
  return model;
}

Index AnyRatioModel::dim() const {
  if (pp) return pp->d;
  if (kernel) return kernel->centers.cols();
  if (logistic) return logistic->w.size();
  throw Error("AnyRatioModel: empty");
}

double AnyRatioModel::evaluate(Eigen::Ref<const Vector> x) const {
  if (pp) return pp->evaluate(x);
  if (kernel) return kernel->evaluate(x);
  if (logistic) return logistic->evaluate(x);
  throw Error("AnyRatioModel: empty");
}

Vector AnyRatioModel::evaluate_all(const Matrix& rows) const {
  if (pp) return pp->evaluate_all(rows);
  if (kernel) return kernel->evaluate_all(rows);
  if (logistic) return logistic->evaluate_all(rows);
  throw Error("AnyRatioModel: empty");
}

AnyRatioModel model_from_json(const std::string& text) {
  const json doc = parse(text);
  const std::string method = method_of(doc);
  AnyRatioModel any;
  any.method = method;
  if (method == "ppdre") {
    any.pp = pp_model_from_json(text);
  } else if (method == "ulsif" || method == "kliep") {
    any.kernel = kernel_model_from_json(text);
  } else if (method == "logistic") {
    any.logistic = logistic_model_from_json(text);
  } else {
    throw Error("model json: unknown method '" + method + "'");
  }
  return any;
}

void save_model_file(const std::string& json_text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << json_text << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

AnyRatioModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace ppdre
