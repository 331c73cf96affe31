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

#ifndef IDFAIR_RELEVANCE_HPP_
#define IDFAIR_RELEVANCE_HPP_

#include <filesystem>
#include <span>
#include <vector>

namespace idfair {

struct ControlPoint {
  double y = 0.0;
  double relevance = 0.0;
  double slope = 0.0;
};

// Relevance map from the target domain to [0, 1].
//
// Between adjacent control points the map is a cubic Hermite segment whose
// end slopes have been passed through the Fritsch-Carlson limiter, so every
// segment is monotone and stays inside the range of its two end relevances.
// Outside the control-point span the map is constant at the nearest end.
class RelevanceFunction {
 public:
  // Boxplot-derived map: relevance 1 at the lower and upper adjacent values
  // (whisker fences Q1 - 1.5 IQR and Q3 + 1.5 IQR clamped to the observed
  // range) and 0 at the median, all with zero slope. Quartiles use the
  // linear-interpolation (type 7) definition.
  static RelevanceFunction FromBoxplot(std::span<const double> targets);

  // Explicit control points; slopes default to 0.
  static RelevanceFunction FromPoints(std::vector<ControlPoint> points);

  // phi(y) == value everywhere.
  static RelevanceFunction Constant(double value);

  // Control points in `y,relevance[,slope]` CSV form.
  static RelevanceFunction LoadCsv(const std::filesystem::path& path);
  void SaveCsv(const std::filesystem::path& path) const;

  double operator()(double y) const { return Evaluate(y); }
  double Evaluate(double y) const;
  std::vector<double> EvaluateAll(std::span<const double> ys) const;

  // Points as given (slopes before limiting).
  const std::vector<ControlPoint>& control_points() const { return points_; }
  // Per-point slopes actually used after limiting.
  const std::vector<double>& limited_slopes() const { return slopes_; }

 private:
  explicit RelevanceFunction(std::vector<ControlPoint> points);

  std::vector<ControlPoint> points_;
  std::vector<double> slopes_;
};

// Quantile with linear interpolation between order statistics (R type 7).
// `sorted` must be ascending and non-empty.
double QuantileType7(std::span<const double> sorted, double p);

}  // namespace idfair

#endif  // IDFAIR_RELEVANCE_HPP_
