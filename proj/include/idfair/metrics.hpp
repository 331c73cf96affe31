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

#ifndef IDFAIR_METRICS_HPP_
#define IDFAIR_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idfair/curves.hpp"
#include "idfair/dataset.hpp"
#include "idfair/relevance.hpp"

namespace idfair {

double MeanSquaredError(std::span<const double> targets,
                        std::span<const double> preds);
double MeanAbsoluteError(std::span<const double> targets,
                         std::span<const double> preds);

// Intersectional divergence: exact integral over t of the gap between the
// largest and smallest normalized SER^t_g among groups non-empty at t.
// Intervals with fewer than two non-empty groups contribute nothing.
double IntersectionalDivergence(const SerCurveSet& curves);

// |MAE(privileged) - MAE(unprivileged)| for one protected attribute.
double DeltaBgl(const GroupedDataset& ds, std::span<const double> preds,
                std::size_t attribute);

// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
double KolmogorovSmirnov(std::span<const double> a, std::span<const double> b);

// KS distance between privileged and unprivileged prediction distributions.
double StatisticalParity(const GroupedDataset& ds,
                         std::span<const double> preds, std::size_t attribute);

// (mae_priv - mae_unpriv) / mae_unpriv * 100; positive means the
// unprivileged side has the lower error.
double MaeDeltaPct(double mae_priv, double mae_unpriv);

enum class DeltaTrend { kReference, kIncrease, kDecrease, kUnchanged, kUndefined };
std::string DeltaTrendName(DeltaTrend trend);

struct MaeDeltaRow {
  std::string label;
  std::size_t n_priv = 0;
  std::size_t n_unpriv = 0;
  std::optional<double> mae_priv;
  std::optional<double> mae_unpriv;
  std::optional<double> delta_pct;
  // Relative to the "All" row: whether |delta| grew or shrank.
  DeltaTrend trend = DeltaTrend::kUndefined;
};

// MAE split by `delta_attribute`, overall and within each value of
// `condition_attribute`. Rows: All, <condition>=priv, <condition>=unpriv.
// Empty cells are flagged through nullopt rather than raised.
struct MaeDeltaTable {
  std::string delta_attribute;
  std::string condition_attribute;
  std::vector<MaeDeltaRow> rows;
};

MaeDeltaTable GroupMaeDeltaPct(const GroupedDataset& ds,
                               std::span<const double> preds,
                               std::size_t delta_attribute,
                               std::size_t condition_attribute);

struct GroupMae {
  GroupId group = 0;
  std::string label;
  std::size_t count = 0;
  std::optional<double> mae;  // nullopt for an empty group
};

struct AttributeFairness {
  std::string attribute;
  std::optional<double> delta_bgl;
  std::optional<double> sp;
};

struct FairnessReport {
  std::size_t n = 0;
  std::optional<double> id;
  double sera = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  // Means over attributes where the per-attribute value is defined.
  std::optional<double> delta_bgl;
  std::optional<double> sp;
  std::vector<AttributeFairness> attributes;
  std::vector<GroupMae> group_mae;
  std::vector<MaeDeltaTable> mae_delta_tables;
  // Component failures, e.g. "id: undefined-measure: ...".
  std::vector<std::string> errors;

  // Stable key order; doubles written with round-trip precision.
  std::string ToJson(int indent = 2) const;
  static FairnessReport FromJson(const std::string& text);

  static std::string CsvHeader();
  std::string CsvRow() const;

  // Rounded, human-readable rendering.
  std::string ToText() const;
};

FairnessReport FullReport(const GroupedDataset& ds,
                          std::span<const double> preds,
                          const RelevanceFunction& phi);

}  // namespace idfair

#endif  // IDFAIR_METRICS_HPP_
