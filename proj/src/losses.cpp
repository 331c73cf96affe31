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

#include "idfair/losses.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "idfair/error.hpp"
#include "idfair/numeric.hpp"

namespace idfair {
namespace {

void CheckLengths(std::size_t targets, std::size_t preds) {
  if (targets != preds) {
    Fail(ErrorKind::kInput,
         fmt::format("prediction length {} does not match {} targets", preds,
                     targets));
  }
}

void RequireTwoGroups(const CurveLayout& layout) {
  std::size_t nonempty = 0;
  for (std::size_t g = 0; g < layout.num_groups(); ++g) {
    nonempty += layout.total_count(static_cast<GroupId>(g)) > 0;
  }
  if (nonempty < 2) {
    Fail(ErrorKind::kUndefinedLoss, "IDLoss needs at least two non-empty groups");
  }
}

GradHess FromWeights(std::span<const double> weight, std::span<const double> targets,
                     std::span<const double> preds, double scale, double hess_floor) {
  GradHess gh;
  gh.grad.resize(preds.size());
  gh.hess.resize(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double w = scale * weight[i];
    gh.grad[i] = 2.0 * (preds[i] - targets[i]) * w;
    gh.hess[i] = std::max(2.0 * w, hess_floor);
  }
  return gh;
}

}  // namespace

// ---------------------------------------------------------------------------
// IDLoss

std::vector<GroupId> MinGroupPerInterval(const SerCurveSet& curves) {
  const CurveLayout& layout = curves.layout();
  std::vector<GroupId> out(layout.num_intervals(), -1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double best = INFINITY;
    for (std::size_t g = 0; g < layout.num_groups(); ++g) {
      const auto gid = static_cast<GroupId>(g);
      if (layout.interval_count(gid, k) == 0) continue;
      const double v = curves.interval_normalized(gid, k);
      if (v < best) {
        best = v;
        out[k] = gid;
      }
    }
  }
  return out;
}

double IdLossValue(const SerCurveSet& curves) {
  const CurveLayout& layout = curves.layout();
  RequireTwoGroups(layout);
  const std::vector<GroupId> min_group = MinGroupPerInterval(curves);
  std::vector<double> integrand(layout.num_intervals(), 0.0);
  for (std::size_t k = 0; k < integrand.size(); ++k) {
    CompensatedSum s;
    for (std::size_t g = 0; g < layout.num_groups(); ++g) {
      const auto gid = static_cast<GroupId>(g);
      if (gid == min_group[k] || layout.interval_count(gid, k) == 0) continue;
      s.Add(curves.interval_normalized(gid, k));
    }
    integrand[k] = s.Value();
  }
  return IntegrateStep(integrand, layout.breakpoints());
}

double IdLossValue(const GroupedDataset& ds, std::span<const double> preds,
                   const RelevanceFunction& phi) {
  CheckLengths(ds.size(), preds.size());
  return IdLossValue(SerCurveSet::Build(ds, preds, phi));
}

IdLossWeights ComputeIdLossWeights(const CurveLayout& layout,
                                   std::span<const GroupId> min_group) {
  if (min_group.size() != layout.num_intervals()) {
    Fail(ErrorKind::kInternal, "alpha_min assignment does not match the layout");
  }
  const std::size_t m = layout.num_intervals();
  const auto b = layout.breakpoints();
  // prefix[g * (m + 1) + j]: weight of a group-g sample at breakpoint level j.
  std::vector<double> prefix(layout.num_groups() * (m + 1), 0.0);
  for (std::size_t g = 0; g < layout.num_groups(); ++g) {
    const auto gid = static_cast<GroupId>(g);
    CompensatedSum acc;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t count = layout.interval_count(gid, k);
      if (count > 0 && min_group[k] != gid) {
        acc.Add((b[k + 1] - b[k]) / static_cast<double>(count));
      }
      prefix[g * (m + 1) + k + 1] = acc.Value();
    }
  }
  IdLossWeights out;
  out.min_group.assign(min_group.begin(), min_group.end());
  out.weight.resize(layout.num_samples());
  const auto group_of = layout.group_of();
  for (std::size_t i = 0; i < out.weight.size(); ++i) {
    const auto g = static_cast<std::size_t>(group_of[i]);
    out.weight[i] = prefix[g * (m + 1) + layout.level(i)];
  }
  return out;
}

IdLossWeights ComputeIdLossWeights(const SerCurveSet& curves) {
  return ComputeIdLossWeights(curves.layout(), MinGroupPerInterval(curves));
}

GradHess IdLossGradHess(const SerCurveSet& curves, std::span<const double> targets,
                        std::span<const double> preds, double hess_floor) {
  CheckLengths(targets.size(), preds.size());
  RequireTwoGroups(curves.layout());
  const IdLossWeights w = ComputeIdLossWeights(curves);
  return FromWeights(w.weight, targets, preds, 1.0, hess_floor);
}

GradHess IdLossGradHess(const GroupedDataset& ds, std::span<const double> preds,
                        const RelevanceFunction& phi, double hess_floor) {
  CheckLengths(ds.size(), preds.size());
  return IdLossGradHess(SerCurveSet::Build(ds, preds, phi), ds.targets(), preds,
                        hess_floor);
}

double IdLossLipschitzBound(const IdLossWeights& weights) {
  CompensatedSum s;
  for (double w : weights.weight) s.Add(4.0 * w * w);
  return std::sqrt(s.Value());
}

// ---------------------------------------------------------------------------
// Baselines

GradHess SeraGradHess(std::span<const double> targets, std::span<const double> preds,
                      std::span<const double> relevance) {
  CheckLengths(targets.size(), preds.size());
  CheckLengths(targets.size(), relevance.size());
  GradHess gh;
  gh.grad.resize(preds.size());
  gh.hess.resize(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    gh.grad[i] = 2.0 * relevance[i] * (preds[i] - targets[i]);
    gh.hess[i] = 2.0 * relevance[i];
  }
  return gh;
}

GradHess SeraGradHess(const GroupedDataset& ds, std::span<const double> preds,
                      const RelevanceFunction& phi) {
  return SeraGradHess(ds.targets(), preds, phi.EvaluateAll(ds.targets()));
}

double SumSquaredError(std::span<const double> targets, std::span<const double> preds) {
  CheckLengths(targets.size(), preds.size());
  CompensatedSum s;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = preds[i] - targets[i];
    s.Add(r * r);
  }
  return s.Value();
}

GradHess MseGradHess(std::span<const double> targets, std::span<const double> preds) {
  CheckLengths(targets.size(), preds.size());
  GradHess gh;
  gh.grad.resize(preds.size());
  gh.hess.assign(preds.size(), 2.0);
  for (std::size_t i = 0; i < preds.size(); ++i) gh.grad[i] = 2.0 * (preds[i] - targets[i]);
  return gh;
}

double HuberValue(std::span<const double> targets, std::span<const double> preds,
                  double delta) {
  CheckLengths(targets.size(), preds.size());
  if (!(delta > 0.0)) Fail(ErrorKind::kParameter, "Huber delta must be positive");
  CompensatedSum s;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double a = std::abs(preds[i] - targets[i]);
    s.Add(a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta));
  }
  return s.Value();
}

GradHess HuberGradHess(std::span<const double> targets, std::span<const double> preds,
                       double delta, double hess_floor) {
  CheckLengths(targets.size(), preds.size());
  if (!(delta > 0.0)) Fail(ErrorKind::kParameter, "Huber delta must be positive");
  GradHess gh;
  gh.grad.resize(preds.size());
  gh.hess.resize(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double r = preds[i] - targets[i];
    if (std::abs(r) <= delta) {
      gh.grad[i] = r;
      gh.hess[i] = 1.0;
    } else {
      gh.grad[i] = r > 0.0 ? delta : -delta;
      gh.hess[i] = hess_floor;
    }
  }
  return gh;
}

// ---------------------------------------------------------------------------
// Objectives

namespace {

class MseObjective final : public Objective {
 public:
  explicit MseObjective(const GroupedDataset& train)
      : targets_(train.targets().begin(), train.targets().end()) {}
  std::string name() const override { return "mse"; }
  GradHess Compute(std::span<const double> preds) override {
    ++stats_.calls;
    return MseGradHess(targets_, preds);
  }
  double Value(std::span<const double> preds) const override {
    return SumSquaredError(targets_, preds) / static_cast<double>(targets_.size());
  }

 private:
  std::vector<double> targets_;
};

class HuberObjective final : public Objective {
 public:
  HuberObjective(const GroupedDataset& train, double delta, double hess_floor)
      : targets_(train.targets().begin(), train.targets().end()),
        delta_(delta),
        hess_floor_(hess_floor) {
    if (!(delta > 0.0)) Fail(ErrorKind::kParameter, "Huber delta must be positive");
  }
  std::string name() const override { return "huber"; }
  GradHess Compute(std::span<const double> preds) override {
    ++stats_.calls;
    return HuberGradHess(targets_, preds, delta_, hess_floor_);
  }
  double Value(std::span<const double> preds) const override {
    return HuberValue(targets_, preds, delta_) / static_cast<double>(targets_.size());
  }

 private:
  std::vector<double> targets_;
  double delta_;
  double hess_floor_;
};

class SeraObjective final : public Objective {
 public:
  SeraObjective(const GroupedDataset& train, const RelevanceFunction& phi)
      : targets_(train.targets().begin(), train.targets().end()),
        relevance_(phi.EvaluateAll(targets_)) {}
  std::string name() const override { return "sera"; }
  GradHess Compute(std::span<const double> preds) override {
    ++stats_.calls;
    return SeraGradHess(targets_, preds, relevance_);
  }
  double Value(std::span<const double> preds) const override {
    return Sera(targets_, preds, relevance_);
  }

 private:
  std::vector<double> targets_;
  std::vector<double> relevance_;
};

class IdLossObjective final : public Objective {
 public:
  IdLossObjective(const GroupedDataset& train, const RelevanceFunction& phi,
                  const ObjectiveOptions& options)
      : layout_(std::make_shared<const CurveLayout>(train, phi)),
        targets_(train.targets().begin(), train.targets().end()),
        hess_floor_(options.hess_floor),
        fast_(options.fast),
        approx_(options.approx) {
    RequireTwoGroups(*layout_);
    if (fast_) approx_.Validate();
  }
  std::string name() const override { return "idloss"; }

  GradHess Compute(std::span<const double> preds) override {
    ++stats_.calls;
    const SerCurveSet curves(layout_, targets_, preds);
    std::vector<GroupId> min_group;
    if (fast_) {
      std::size_t points = 0;
      min_group = ApproxMinGroupPerInterval(*layout_, Simplify(curves, approx_), &points);
      stats_.curve_points += points;
    } else {
      min_group = MinGroupPerInterval(curves);
      stats_.curve_points += layout_->num_intervals();
    }
    const IdLossWeights w = ComputeIdLossWeights(*layout_, min_group);
    // See MakeObjective: per-sample scale for lambda and min_child_hessian.
    return FromWeights(w.weight, targets_, preds,
                       static_cast<double>(targets_.size()), hess_floor_);
  }

  double Value(std::span<const double> preds) const override {
    return IdLossValue(SerCurveSet(layout_, targets_, preds));
  }

 private:
  std::shared_ptr<const CurveLayout> layout_;
  std::vector<double> targets_;
  double hess_floor_;
  bool fast_;
  ApproxParams approx_;
};

const RelevanceFunction& RequireRelevance(const ObjectiveOptions& options,
                                          const std::string& name) {
  if (!options.relevance) {
    Fail(ErrorKind::kParameter, "objective '" + name + "' needs a relevance function");
  }
  return *options.relevance;
}

}  // namespace

bool IsKnownObjective(const std::string& name) {
  return name == "mse" || name == "huber" || name == "sera" || name == "idloss";
}

std::unique_ptr<Objective> MakeObjective(const std::string& name,
                                         const GroupedDataset& train,
                                         const ObjectiveOptions& options) {
  if (train.size() == 0) Fail(ErrorKind::kEmptyData, "empty training set");
  if (name == "mse") return std::make_unique<MseObjective>(train);
  if (name == "huber") {
    return std::make_unique<HuberObjective>(train, options.huber_delta, options.hess_floor);
  }
  if (name == "sera") {
    return std::make_unique<SeraObjective>(train, RequireRelevance(options, name));
  }
  if (name == "idloss") {
    return std::make_unique<IdLossObjective>(train, RequireRelevance(options, name),
                                             options);
  }
  Fail(ErrorKind::kParameter,
       "unknown objective '" + name + "' (expected mse, huber, sera or idloss)");
}

}  // namespace idfair
