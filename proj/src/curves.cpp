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

#include "idfair/curves.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "idfair/error.hpp"
#include "idfair/io.hpp"
#include "idfair/numeric.hpp"

namespace idfair {

CurveLayout::CurveLayout(const GroupedDataset& ds, const RelevanceFunction& phi)
    : relevance_(phi.EvaluateAll(ds.targets())),
      group_of_(ds.group_of().begin(), ds.group_of().end()),
      num_groups_(ds.num_groups()) {
  Build();
}

CurveLayout::CurveLayout(std::vector<double> relevance,
                         std::vector<GroupId> group_of, std::size_t num_groups)
    : relevance_(std::move(relevance)),
      group_of_(std::move(group_of)),
      num_groups_(num_groups) {
  Build();
}

void CurveLayout::Build() {
  if (relevance_.size() != group_of_.size()) {
    Fail(ErrorKind::kInput,
         fmt::format("{} relevances for {} group assignments", relevance_.size(),
                     group_of_.size()));
  }
  if (relevance_.empty()) Fail(ErrorKind::kEmptyData, "no samples for curves");
  for (std::size_t i = 0; i < relevance_.size(); ++i) {
    const double r = relevance_[i];
    if (!(r >= 0.0 && r <= 1.0)) {
      Fail(ErrorKind::kValidation, fmt::format("relevance {} outside [0,1]", r));
    }
    if (group_of_[i] < 0 || static_cast<std::size_t>(group_of_[i]) >= num_groups_) {
      Fail(ErrorKind::kInput, fmt::format("group id {} out of range", group_of_[i]));
    }
  }

  breakpoints_ = relevance_;
  breakpoints_.push_back(0.0);
  breakpoints_.push_back(1.0);
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()),
                     breakpoints_.end());

  const std::size_t m = num_intervals();
  level_.resize(relevance_.size());
  // per_level[g * (m + 1) + j]: group g samples sitting on breakpoint j.
  std::vector<std::size_t> per_level(num_groups_ * (m + 1), 0);
  totals_.assign(num_groups_, 0);
  support_end_.assign(num_groups_, -1.0);
  for (std::size_t i = 0; i < relevance_.size(); ++i) {
    const auto j = static_cast<std::size_t>(
        std::lower_bound(breakpoints_.begin(), breakpoints_.end(), relevance_[i]) -
        breakpoints_.begin());
    level_[i] = j;
    const auto g = static_cast<std::size_t>(group_of_[i]);
    ++per_level[g * (m + 1) + j];
    ++totals_[g];
    support_end_[g] = std::max(support_end_[g], relevance_[i]);
  }
  // Present on interval k iff level > k: suffix sums from the top.
  counts_.assign(num_groups_ * m, 0);
  for (std::size_t g = 0; g < num_groups_; ++g) {
    std::size_t above = 0;
    for (std::size_t k = m; k-- > 0;) {
      above += per_level[g * (m + 1) + k + 1];
      counts_[g * m + k] = above;
    }
  }
}

std::size_t CurveLayout::FirstBreakpointAtOrAbove(double t) const {
  return static_cast<std::size_t>(
      std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t) -
      breakpoints_.begin());
}

std::size_t CurveLayout::count_at(GroupId g, double t) const {
  const std::size_t j = FirstBreakpointAtOrAbove(t);
  if (j == 0) return total_count(g);
  if (j > num_intervals()) return 0;
  return interval_count(g, j - 1);
}

// ---------------------------------------------------------------------------

SerCurveSet::SerCurveSet(std::shared_ptr<const CurveLayout> layout,
                         std::span<const double> targets,
                         std::span<const double> preds)
    : layout_(std::move(layout)) {
  const std::size_t n = layout_->num_samples();
  if (targets.size() != n || preds.size() != n) {
    Fail(ErrorKind::kInput,
         fmt::format("prediction length {} does not match {} targets",
                     preds.size(), targets.size() == n ? n : targets.size()));
  }
  squared_error_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(preds[i])) {
      Fail(ErrorKind::kInput, fmt::format("non-finite prediction at row {}", i));
    }
    const double r = preds[i] - targets[i];
    squared_error_[i] = r * r;
  }

  const std::size_t m = layout_->num_intervals();
  const std::size_t groups = layout_->num_groups();
  std::vector<CompensatedSum> per_level(groups * (m + 1));
  const auto group_of = layout_->group_of();
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(group_of[i]);
    per_level[g * (m + 1) + layout_->level(i)].Add(squared_error_[i]);
  }
  ser_.assign(groups * m, 0.0);
  totals_.assign(groups, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    // Suffix sums from the top level keep each value a sum of its own
    // samples, so sparse high-relevance tails are not swamped by rounding.
    CompensatedSum above;
    for (std::size_t k = m; k-- > 0;) {
      above.Add(per_level[g * (m + 1) + k + 1].Value());
      ser_[g * m + k] = above.Value();
    }
    above.Add(per_level[g * (m + 1)].Value());
    totals_[g] = above.Value();
  }
}

SerCurveSet SerCurveSet::Build(const GroupedDataset& ds,
                               std::span<const double> preds,
                               const RelevanceFunction& phi) {
  return SerCurveSet(std::make_shared<const CurveLayout>(ds, phi), ds.targets(),
                     preds);
}

double SerCurveSet::interval_normalized(GroupId g, std::size_t k) const {
  const std::size_t count = layout_->interval_count(g, k);
  if (count == 0) return std::numeric_limits<double>::quiet_NaN();
  return interval_ser(g, k) / static_cast<double>(count);
}

double SerCurveSet::ser_at(GroupId g, double t) const {
  const std::size_t j = layout_->FirstBreakpointAtOrAbove(t);
  if (j == 0) return total_ser(g);
  if (j > num_intervals()) return 0.0;
  return interval_ser(g, j - 1);
}

double SerCurveSet::normalized_at(GroupId g, double t) const {
  const std::size_t count = count_at(g, t);
  if (count == 0) return std::numeric_limits<double>::quiet_NaN();
  return ser_at(g, t) / static_cast<double>(count);
}

double SerCurveSet::pooled_ser_at(double t) const {
  CompensatedSum s;
  for (std::size_t g = 0; g < num_groups(); ++g) s.Add(ser_at(static_cast<GroupId>(g), t));
  return s.Value();
}

std::vector<double> SerCurveSet::pooled_interval_sers() const {
  std::vector<double> out(num_intervals());
  for (std::size_t k = 0; k < out.size(); ++k) {
    CompensatedSum s;
    for (std::size_t g = 0; g < num_groups(); ++g) {
      s.Add(interval_ser(static_cast<GroupId>(g), k));
    }
    out[k] = s.Value();
  }
  return out;
}

std::string SerCurveSet::ExportCsvText() const {
  std::string text = "t,group,ser,count,normalized_ser\n";
  for (double t : breakpoints()) {
    for (std::size_t g = 0; g < num_groups(); ++g) {
      const auto gid = static_cast<GroupId>(g);
      const std::size_t count = count_at(gid, t);
      const double ser = ser_at(gid, t);
      text += CsvLine({FormatExact(t), std::to_string(g), FormatExact(ser),
                       std::to_string(count),
                       count ? FormatExact(ser / static_cast<double>(count)) : ""});
    }
  }
  return text;
}

void SerCurveSet::ExportCsv(const std::filesystem::path& path) const {
  WriteTextFile(path, ExportCsvText());
}

// ---------------------------------------------------------------------------

double IntegrateStep(std::span<const double> interval_values,
                     std::span<const double> breakpoints) {
  if (interval_values.size() + 1 != breakpoints.size()) {
    Fail(ErrorKind::kInternal,
         fmt::format("{} step values for {} breakpoints", interval_values.size(),
                     breakpoints.size()));
  }
  CompensatedSum s;
  for (std::size_t k = 0; k < interval_values.size(); ++k) {
    const double width = breakpoints[k + 1] - breakpoints[k];
    if (width < 0.0) Fail(ErrorKind::kInternal, "breakpoints are not sorted");
    if (width > 0.0) s.Add(width * interval_values[k]);
  }
  return s.Value();
}

double Sera(std::span<const double> targets, std::span<const double> preds,
            std::span<const double> relevance) {
  if (preds.size() != targets.size() || relevance.size() != targets.size()) {
    Fail(ErrorKind::kInput,
         fmt::format("prediction length {} does not match {} targets",
                     preds.size(), targets.size()));
  }
  CompensatedSum s;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = preds[i] - targets[i];
    s.Add(relevance[i] * r * r);
  }
  return s.Value();
}

double Sera(const GroupedDataset& ds, std::span<const double> preds,
            const RelevanceFunction& phi) {
  const auto rel = phi.EvaluateAll(ds.targets());
  return Sera(ds.targets(), preds, rel);
}

double SeraFromCurves(const SerCurveSet& curves) {
  return IntegrateStep(curves.pooled_interval_sers(), curves.breakpoints());
}

}  // namespace idfair
