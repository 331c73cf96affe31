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

#ifndef IDFAIR_CURVES_HPP_
#define IDFAIR_CURVES_HPP_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "idfair/dataset.hpp"
#include "idfair/relevance.hpp"

namespace idfair {

// Prediction-independent part of the per-group squared-error-relevance
// curves: sample relevances, the breakpoint grid and the count curves.
//
// Breakpoints b_0 = 0 < b_1 < ... < b_m = 1 are the distinct sample
// relevances plus {0, 1}. Interval k is (b_k, b_{k+1}); a sample with
// relevance r is present on interval k iff r >= b_{k+1}.
class CurveLayout {
 public:
  CurveLayout(const GroupedDataset& ds, const RelevanceFunction& phi);
  // Relevances must lie in [0, 1]; group ids in [0, num_groups).
  CurveLayout(std::vector<double> relevance, std::vector<GroupId> group_of,
              std::size_t num_groups);

  std::size_t num_samples() const { return relevance_.size(); }
  std::size_t num_groups() const { return num_groups_; }
  std::size_t num_intervals() const { return breakpoints_.size() - 1; }

  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> relevance() const { return relevance_; }
  std::span<const GroupId> group_of() const { return group_of_; }
  // Breakpoint index holding sample i's relevance.
  std::size_t level(std::size_t i) const { return level_[i]; }

  // |D^t_g| on interval k.
  std::size_t interval_count(GroupId g, std::size_t k) const {
    return counts_[Index(g, k)];
  }
  std::span<const std::size_t> interval_counts(GroupId g) const {
    return std::span<const std::size_t>(counts_).subspan(
        static_cast<std::size_t>(g) * num_intervals(), num_intervals());
  }
  std::size_t total_count(GroupId g) const {
    return totals_[static_cast<std::size_t>(g)];
  }
  // Largest relevance among the group's samples; -1 for an empty group.
  double support_end(GroupId g) const {
    return support_end_[static_cast<std::size_t>(g)];
  }
  // |{i in g : relevance_i >= t}|.
  std::size_t count_at(GroupId g, double t) const;

  std::size_t Index(GroupId g, std::size_t k) const {
    return static_cast<std::size_t>(g) * num_intervals() + k;
  }
  // Number of breakpoints b_j with b_j >= t, counted from the top: returns the
  // smallest j with b_j >= t (num_intervals()+1 when t > 1).
  std::size_t FirstBreakpointAtOrAbove(double t) const;

 private:
  void Build();

  std::vector<double> relevance_;
  std::vector<GroupId> group_of_;
  std::size_t num_groups_ = 0;
  std::vector<double> breakpoints_;
  std::vector<std::size_t> level_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> totals_;
  std::vector<double> support_end_;
};

// Per-group SER^t step curves for one prediction vector.
class SerCurveSet {
 public:
  SerCurveSet(std::shared_ptr<const CurveLayout> layout,
              std::span<const double> targets, std::span<const double> preds);

  static SerCurveSet Build(const GroupedDataset& ds,
                           std::span<const double> preds,
                           const RelevanceFunction& phi);

  const CurveLayout& layout() const { return *layout_; }
  std::shared_ptr<const CurveLayout> shared_layout() const { return layout_; }
  std::size_t num_groups() const { return layout_->num_groups(); }
  std::size_t num_intervals() const { return layout_->num_intervals(); }
  std::span<const double> breakpoints() const { return layout_->breakpoints(); }

  // SER^t_g on interval k.
  double interval_ser(GroupId g, std::size_t k) const {
    return ser_[layout_->Index(g, k)];
  }
  std::span<const double> interval_sers(GroupId g) const {
    return std::span<const double>(ser_).subspan(
        static_cast<std::size_t>(g) * num_intervals(), num_intervals());
  }
  // SER^t_g / |D^t_g| on interval k; NaN when the group is empty there.
  double interval_normalized(GroupId g, std::size_t k) const;

  // Point evaluations with the inclusive cutoff phi(y) >= t.
  double ser_at(GroupId g, double t) const;
  std::size_t count_at(GroupId g, double t) const {
    return layout_->count_at(g, t);
  }
  // NaN when the group is empty at t.
  double normalized_at(GroupId g, double t) const;
  // Sum over groups (the pooled SER^t).
  double pooled_ser_at(double t) const;
  std::vector<double> pooled_interval_sers() const;

  double total_ser(GroupId g) const {
    return totals_[static_cast<std::size_t>(g)];
  }
  std::span<const double> squared_errors() const { return squared_error_; }

  // Columns t,group,ser,count,normalized_ser at every breakpoint, point
  // semantics. normalized_ser is empty where the group has no samples.
  std::string ExportCsvText() const;
  void ExportCsv(const std::filesystem::path& path) const;

 private:
  std::shared_ptr<const CurveLayout> layout_;
  std::vector<double> squared_error_;
  std::vector<double> ser_;
  std::vector<double> totals_;
};

// Exact integral of a step function holding interval_values[k] on
// [breakpoints[k], breakpoints[k+1]). Requires
// interval_values.size() + 1 == breakpoints.size() and non-decreasing
// breakpoints.
double IntegrateStep(std::span<const double> interval_values,
                     std::span<const double> breakpoints);

// SERA through the closed form sum_i phi(y_i) (yhat_i - y_i)^2.
double Sera(const GroupedDataset& ds, std::span<const double> preds,
            const RelevanceFunction& phi);
double Sera(std::span<const double> targets, std::span<const double> preds,
            std::span<const double> relevance);
// SERA as the integral of the pooled SER^t curve.
double SeraFromCurves(const SerCurveSet& curves);

}  // namespace idfair

#endif  // IDFAIR_CURVES_HPP_
