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

#include "idfair/relevance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "idfair/error.hpp"
#include "idfair/io.hpp"
#include "idfair/numeric.hpp"

namespace idfair {
namespace {

double HermiteSegment(double x0, double x1, double r0, double r1, double m0,
                      double m1, double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * r0 + h10 * h * m0 + h01 * r1 + h11 * h * m1;
}

}  // namespace

double QuantileType7(std::span<const double> sorted, double p) {
  if (sorted.empty()) Fail(ErrorKind::kInternal, "quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

RelevanceFunction::RelevanceFunction(std::vector<ControlPoint> points)
    : points_(std::move(points)) {
  if (points_.size() < 2) {
    Fail(ErrorKind::kValidation, "relevance needs at least 2 control points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.y) || !std::isfinite(p.slope)) {
      Fail(ErrorKind::kValidation, "non-finite relevance control point");
    }
    if (!(p.relevance >= 0.0 && p.relevance <= 1.0)) {
      Fail(ErrorKind::kValidation,
           fmt::format("relevance {} at y={} outside [0,1]", p.relevance, p.y));
    }
    if (i > 0 && !(p.y > points_[i - 1].y)) {
      Fail(ErrorKind::kValidation,
           fmt::format("control point y values must be strictly increasing "
                       "(y={} follows y={})",
                       p.y, points_[i - 1].y));
    }
  }

  // Fritsch-Carlson: per interval, zero slopes that disagree with the secant
  // and scale the pair back into the monotone region alpha^2 + beta^2 <= 9.
  // Shrinking a shared slope for the right interval keeps the left interval
  // inside its region too, so one pass suffices.
  slopes_.resize(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) slopes_[i] = points_[i].slope;
  for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
    const double secant = (points_[k + 1].relevance - points_[k].relevance) /
                          (points_[k + 1].y - points_[k].y);
    if (secant == 0.0) {
      slopes_[k] = 0.0;
      slopes_[k + 1] = 0.0;
      continue;
    }
    double a = slopes_[k] / secant;
    double b = slopes_[k + 1] / secant;
    if (a < 0.0) {
      slopes_[k] = 0.0;
      a = 0.0;
    }
    if (b < 0.0) {
      slopes_[k + 1] = 0.0;
      b = 0.0;
    }
    const double norm2 = a * a + b * b;
    if (norm2 > 9.0) {
      const double tau = 3.0 / std::sqrt(norm2);
      slopes_[k] = tau * a * secant;
      slopes_[k + 1] = tau * b * secant;
    }
  }
}

RelevanceFunction RelevanceFunction::FromPoints(std::vector<ControlPoint> points) {
  return RelevanceFunction(std::move(points));
}

RelevanceFunction RelevanceFunction::Constant(double value) {
  return RelevanceFunction({{0.0, value, 0.0}, {1.0, value, 0.0}});
}

RelevanceFunction RelevanceFunction::FromBoxplot(std::span<const double> targets) {
  std::vector<double> sorted(targets.begin(), targets.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) Fail(ErrorKind::kInput, "non-finite target value");
  }
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || sorted.front() == sorted.back()) {
    Fail(ErrorKind::kDegenerateDistribution,
         "all targets are equal; boxplot relevance is undefined");
  }
  std::size_t n_distinct = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] != sorted[i - 1]) ++n_distinct;
  }
  if (n_distinct < 5) {
    Fail(ErrorKind::kValidation,
         fmt::format("boxplot relevance needs >= 5 distinct targets, got {}",
                     n_distinct));
  }

  const double q1 = QuantileType7(sorted, 0.25);
  const double median = QuantileType7(sorted, 0.5);
  const double q3 = QuantileType7(sorted, 0.75);
  const double iqr = q3 - q1;
  double lower = std::max(q1 - 1.5 * iqr, sorted.front());
  double upper = std::min(q3 + 1.5 * iqr, sorted.back());
  // A collapsed box puts a fence on the median; fall back to the observed
  // extreme on that side so the control points stay distinct.
  if (!(lower < median)) lower = sorted.front();
  if (!(upper > median)) upper = sorted.back();

  std::vector<ControlPoint> points;
  if (lower < median) points.push_back({lower, 1.0, 0.0});
  points.push_back({median, 0.0, 0.0});
  if (upper > median) points.push_back({upper, 1.0, 0.0});
  return RelevanceFunction(std::move(points));
}

double RelevanceFunction::Evaluate(double y) const {
  if (!std::isfinite(y)) {
    Fail(ErrorKind::kInput, "relevance of a non-finite target value");
  }
  if (y <= points_.front().y) return points_.front().relevance;
  if (y >= points_.back().y) return points_.back().relevance;
  const auto it = std::upper_bound(
      points_.begin(), points_.end(), y,
      [](double v, const ControlPoint& p) { return v < p.y; });
  const auto k = static_cast<std::size_t>(it - points_.begin()) - 1;
  const ControlPoint& p0 = points_[k];
  const ControlPoint& p1 = points_[k + 1];
  const double v = HermiteSegment(p0.y, p1.y, p0.relevance, p1.relevance,
                                  slopes_[k], slopes_[k + 1], y);
  const double lo = std::min(p0.relevance, p1.relevance);
  const double hi = std::max(p0.relevance, p1.relevance);
  return std::clamp(v, lo, hi);
}

std::vector<double> RelevanceFunction::EvaluateAll(std::span<const double> ys) const {
  std::vector<double> out(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) out[i] = Evaluate(ys[i]);
  return out;
}

RelevanceFunction RelevanceFunction::LoadCsv(const std::filesystem::path& path) {
  const CsvTable table = ReadCsv(path);
  const auto y_col = table.Column("y");
  const auto r_col = table.Column("relevance");
  if (!y_col || !r_col) {
    Fail(ErrorKind::kSchema,
         "relevance file " + path.string() + " needs columns y,relevance");
  }
  const auto s_col = table.Column("slope");
  std::vector<ControlPoint> points;
  for (const auto& row : table.rows) {
    ControlPoint p;
    if (!ParseDouble(row[*y_col], p.y) ||
        !ParseDouble(row[*r_col], p.relevance) ||
        (s_col && !ParseDouble(row[*s_col], p.slope))) {
      Fail(ErrorKind::kValidation,
           "unparseable control point in " + path.string());
    }
    points.push_back(p);
  }
  return RelevanceFunction(std::move(points));
}

void RelevanceFunction::SaveCsv(const std::filesystem::path& path) const {
  const bool any_slope = std::any_of(points_.begin(), points_.end(),
                                     [](const auto& p) { return p.slope != 0.0; });
  std::string text = any_slope ? "y,relevance,slope\n" : "y,relevance\n";
  for (const auto& p : points_) {
    text += FormatExact(p.y) + "," + FormatExact(p.relevance);
    if (any_slope) text += "," + FormatExact(p.slope);
    text += "\n";
  }
  WriteTextFile(path, text);
}

}  // namespace idfair
