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

#ifndef IDFAIR_LOSSES_HPP_
#define IDFAIR_LOSSES_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idfair/approx.hpp"
#include "idfair/curves.hpp"
#include "idfair/dataset.hpp"
#include "idfair/relevance.hpp"

namespace idfair {

inline constexpr double kDefaultHessFloor = 1e-6;

// Per-sample first and second derivative of a loss with respect to the
// predictions.
struct GradHess {
  std::vector<double> grad;
  std::vector<double> hess;
};

// ---------------------------------------------------------------------------
// IDLoss: integral over t of sum over groups except the per-t minimum group
// of SER^t_g / |D^t_g|.

// alpha_min on every breakpoint interval: the non-empty group with the least
// normalized SER, ties to the lowest id; -1 where no group is non-empty.
std::vector<GroupId> MinGroupPerInterval(const SerCurveSet& curves);

double IdLossValue(const SerCurveSet& curves);
double IdLossValue(const GroupedDataset& ds, std::span<const double> preds,
                   const RelevanceFunction& phi);

// Per-sample weights W_j = integral_0^{phi(y_j)} 1(g(j) != alpha_min(t)) /
// |D^t_{g(j)}| dt for a fixed alpha_min assignment (one entry per interval).
// The loss restricted to that assignment is sum_j W_j (yhat_j - y_j)^2.
struct IdLossWeights {
  std::vector<double> weight;
  std::vector<GroupId> min_group;
};
IdLossWeights ComputeIdLossWeights(const CurveLayout& layout,
                                   std::span<const GroupId> min_group);
IdLossWeights ComputeIdLossWeights(const SerCurveSet& curves);

// grad_j = 2 (yhat_j - y_j) W_j, hess_j = max(2 W_j, hess_floor), with
// alpha_min frozen at its value for `preds`.
GradHess IdLossGradHess(const GroupedDataset& ds, std::span<const double> preds,
                        const RelevanceFunction& phi,
                        double hess_floor = kDefaultHessFloor);
GradHess IdLossGradHess(const SerCurveSet& curves,
                        std::span<const double> targets,
                        std::span<const double> preds, double hess_floor);

// Lipschitz constant of the gradient inside the region of `preds`:
// sqrt(sum_j C_j^2) with C_j = 2 W_j.
double IdLossLipschitzBound(const IdLossWeights& weights);

// ---------------------------------------------------------------------------
// Baseline objectives. Values follow the same no-1/2 convention as SERA
// except Huber, which uses the usual 1/2 r^2 quadratic zone.

GradHess SeraGradHess(const GroupedDataset& ds, std::span<const double> preds,
                      const RelevanceFunction& phi);
GradHess SeraGradHess(std::span<const double> targets,
                      std::span<const double> preds,
                      std::span<const double> relevance);

double SumSquaredError(std::span<const double> targets,
                       std::span<const double> preds);
GradHess MseGradHess(std::span<const double> targets,
                     std::span<const double> preds);

double HuberValue(std::span<const double> targets,
                  std::span<const double> preds, double delta);
GradHess HuberGradHess(std::span<const double> targets,
                       std::span<const double> preds, double delta,
                       double hess_floor = kDefaultHessFloor);

// ---------------------------------------------------------------------------
// Objectives bound to a training set, as consumed by the boosting engine.

struct ObjectiveOptions {
  std::optional<RelevanceFunction> relevance;  // required by sera and idloss
  double huber_delta = 1.0;
  double hess_floor = kDefaultHessFloor;
  // idloss only: pick alpha_min from simplified curves.
  bool fast = false;
  ApproxParams approx;
};

struct ObjectiveStats {
  std::size_t calls = 0;
  // Cutoff positions at which groups were compared to pick alpha_min.
  std::size_t curve_points = 0;
};

class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::string name() const = 0;
  virtual GradHess Compute(std::span<const double> preds) = 0;
  // Loss as written (unscaled), used for the training trace.
  virtual double Value(std::span<const double> preds) const = 0;
  const ObjectiveStats& stats() const { return stats_; }

 protected:
  ObjectiveStats stats_;
};

// name: mse | huber | sera | idloss.
//
// The idloss objective multiplies gradient and Hessian by the training-set
// size. The loss averages within groups, so its raw curvature is O(1/n);
// rescaling puts it on the per-sample scale of the other objectives so the
// same l2_lambda and min_child_hessian mean the same thing for all of them.
// Leaf weights -G/(H + lambda) are otherwise unchanged.
std::unique_ptr<Objective> MakeObjective(const std::string& name,
                                         const GroupedDataset& train,
                                         const ObjectiveOptions& options);

bool IsKnownObjective(const std::string& name);

}  // namespace idfair

#endif  // IDFAIR_LOSSES_HPP_
