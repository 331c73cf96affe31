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

#ifndef IDFAIR_GBT_HPP_
#define IDFAIR_GBT_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "idfair/dataset.hpp"
#include "idfair/losses.hpp"

namespace idfair {

struct BoostParams {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 6;
  double min_child_hessian = 1.0;
  double l2_lambda = 1.0;
  double hess_floor = kDefaultHessFloor;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // row goes left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf weight

  bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes)
      : nodes_(std::move(nodes)) {}

  double Predict(std::span<const double> row) const;
  int Depth() const;
  std::size_t num_leaves() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

class TreeEnsemble {
 public:
  TreeEnsemble() = default;
  TreeEnsemble(double base_score, std::vector<RegressionTree> trees,
               BoostParams params, std::string objective,
               std::size_t num_features, std::vector<double> trace);

  double base_score() const { return base_score_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  const BoostParams& params() const { return params_; }
  const std::string& objective() const { return objective_; }
  std::size_t num_features() const { return num_features_; }
  // Training loss before round 1 and after every round.
  const std::vector<double>& trace() const { return trace_; }

  double PredictRow(std::span<const double> row) const;
  // Row-major matrix with num_features() columns.
  std::vector<double> Predict(std::span<const double> features,
                              std::size_t num_features) const;
  std::vector<double> Predict(const GroupedDataset& ds) const;

  // The first k rounds of this ensemble.
  TreeEnsemble Truncated(std::size_t k) const;

  // Versioned JSON (format "idfair.tree_ensemble", version 1).
  std::string ToJson() const;
  static TreeEnsemble FromJson(const std::string& text);

 private:
  double base_score_ = 0.0;
  std::vector<RegressionTree> trees_;
  BoostParams params_;
  std::string objective_;
  std::size_t num_features_ = 0;
  std::vector<double> trace_;
};

// Called after every round with the updated training predictions.
using RoundObserver =
    std::function<void(int round, std::span<const double> train_preds)>;

// Newton boosting: base score = target mean; every round evaluates the
// objective at the current predictions, grows one tree with exact
// presorted split search on the second-order gain, sets leaf weights to
// -G/(H + lambda) and adds learning_rate times the tree.
TreeEnsemble Fit(const GroupedDataset& ds, Objective& objective,
                 const BoostParams& params, const RoundObserver& observer = {});

// Convenience: builds the objective by name.
TreeEnsemble Fit(const GroupedDataset& ds, const std::string& objective,
                 const ObjectiveOptions& options, const BoostParams& params,
                 const RoundObserver& observer = {});

}  // namespace idfair

#endif  // IDFAIR_GBT_HPP_
