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

#ifndef IDFAIR_IDBOOST_HPP_
#define IDFAIR_IDBOOST_HPP_

#include <span>
#include <string>
#include <vector>

#include "idfair/approx.hpp"
#include "idfair/gbt.hpp"
#include "idfair/relevance.hpp"

namespace idfair {

// Two ensembles trained on the same data, one on IDLoss and one on SERA,
// blended as w * f_id + (1 - w) * f_sera.
class IdBoostModel {
 public:
  IdBoostModel(TreeEnsemble id_ensemble, TreeEnsemble sera_ensemble, double w);

  const TreeEnsemble& id_ensemble() const { return id_ensemble_; }
  const TreeEnsemble& sera_ensemble() const { return sera_ensemble_; }
  double w() const { return w_; }
  // "IDBoost_1.0", "IDBoost_0.5", "IDBoost_0.25".
  std::string Name() const;

  std::vector<double> Predict(std::span<const double> features,
                              std::size_t num_features) const;
  std::vector<double> Predict(const GroupedDataset& ds) const;

  // {"format": "idfair.idboost", "version": 1, "w": ..., "id_ensemble": {...},
  //  "sera_ensemble": {...}}
  std::string ToJson() const;
  static IdBoostModel FromJson(const std::string& text);

 private:
  TreeEnsemble id_ensemble_;
  TreeEnsemble sera_ensemble_;
  double w_;
};

std::string IdBoostName(double w);

struct IdBoostOptions {
  BoostParams params;
  double w = 0.5;
  bool fast = false;
  ApproxParams approx;
};

IdBoostModel FitIdBoost(const GroupedDataset& ds, const RelevanceFunction& phi,
                        const IdBoostOptions& options);

// Blend helper shared with tests: w * a + (1 - w) * b element-wise.
std::vector<double> BlendPredictions(std::span<const double> a,
                                     std::span<const double> b, double w);

}  // namespace idfair

#endif  // IDFAIR_IDBOOST_HPP_
