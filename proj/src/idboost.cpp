/*
 * Copyright 2026 The idfair Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "idfair/idboost.hpp"

#include <fmt/format.h>

#include <cmath>
#include <json.hpp>

#include "idfair/error.hpp"

namespace idfair {
namespace {

using Json = nlohmann::ordered_json;

void CheckWeight(double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    Fail(ErrorKind::kParameter, fmt::format("fairness weight {} outside [0, 1]", w));
  }
}

}  // namespace

std::vector<double> BlendPredictions(std::span<const double> a,
                                     std::span<const double> b, double w) {
  if (a.size() != b.size()) {
    Fail(ErrorKind::kInput,
         fmt::format("cannot blend {} and {} predictions", a.size(), b.size()));
  }
  std::vector<double> out(a.size());
  // The endpoints return the component exactly.
  if (w == 1.0) return {a.begin(), a.end()};
  if (w == 0.0) return {b.begin(), b.end()};
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = w * a[i] + (1.0 - w) * b[i];
  return out;
}

std::string IdBoostName(double w) {
  // One decimal at least, more when needed: 1.0, 0.5, 0.25.
  std::string s = fmt::format("{:.6f}", w);
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return "IDBoost_" + s;
}

IdBoostModel::IdBoostModel(TreeEnsemble id_ensemble, TreeEnsemble sera_ensemble,
                           double w)
    : id_ensemble_(std::move(id_ensemble)),
      sera_ensemble_(std::move(sera_ensemble)),
      w_(w) {
  CheckWeight(w);
  if (id_ensemble_.num_features() != sera_ensemble_.num_features()) {
    Fail(ErrorKind::kInput, "IDBoost components disagree on the feature count");
  }
}

std::string IdBoostModel::Name() const { return IdBoostName(w_); }

std::vector<double> IdBoostModel::Predict(std::span<const double> features,
                                          std::size_t num_features) const {
  return BlendPredictions(id_ensemble_.Predict(features, num_features),
                          sera_ensemble_.Predict(features, num_features), w_);
}

std::vector<double> IdBoostModel::Predict(const GroupedDataset& ds) const {
  return BlendPredictions(id_ensemble_.Predict(ds), sera_ensemble_.Predict(ds), w_);
}

std::string IdBoostModel::ToJson() const {
  Json j;
  j["format"] = "idfair.idboost";
  j["version"] = 1;
  j["w"] = w_;
  j["id_ensemble"] = Json::parse(id_ensemble_.ToJson());
  j["sera_ensemble"] = Json::parse(sera_ensemble_.ToJson());
  return j.dump();
}

IdBoostModel IdBoostModel::FromJson(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
    if (j.at("format").get<std::string>() != "idfair.idboost") {
      Fail(ErrorKind::kInput, "not an IDBoost model file");
    }
    if (j.at("version").get<int>() != 1) {
      Fail(ErrorKind::kInput, "unsupported IDBoost model version");
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kInput, std::string("malformed model JSON: ") + e.what());
  }
  return IdBoostModel(TreeEnsemble::FromJson(j.at("id_ensemble").dump()),
                      TreeEnsemble::FromJson(j.at("sera_ensemble").dump()),
                      j.at("w").get<double>());
}

IdBoostModel FitIdBoost(const GroupedDataset& ds, const RelevanceFunction& phi,
                        const IdBoostOptions& options) {
  CheckWeight(options.w);
  ObjectiveOptions obj;
  obj.relevance = phi;
  obj.hess_floor = options.params.hess_floor;
  obj.fast = options.fast;
  obj.approx = options.approx;
  TreeEnsemble id = Fit(ds, "idloss", obj, options.params);
  obj.fast = false;
  TreeEnsemble sera = Fit(ds, "sera", obj, options.params);
  return IdBoostModel(std::move(id), std::move(sera), options.w);
}

}  // namespace idfair
