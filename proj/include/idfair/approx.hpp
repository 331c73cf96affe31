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

#ifndef IDFAIR_APPROX_HPP_
#define IDFAIR_APPROX_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "idfair/curves.hpp"

namespace idfair {

struct ApproxParams {
  double sigma = 1e-2;      // Gaussian bandwidth, relevance units
  double grid_step = 1e-3;  // resampling step
  std::size_t min_points = 2;

  void Validate() const;
};

enum class Interpolation { kLinear, kStep };

// A group's normalized SER curve reduced to a few retained points.
//
// The curve is defined on [0, support_end], where support_end is the
// largest relevance in the group; beyond it the group is empty and the curve
// is not a candidate in any comparison. Points span [0, 1]; a trailing
// (1, 0) point is kept when support_end < 1.
struct SimplifiedCurve {
  GroupId group = 0;
  std::vector<double> t;
  std::vector<double> value;
  double support_end = -1.0;  // < 0 for an empty group
  Interpolation interpolation = Interpolation::kLinear;

  bool empty() const { return support_end < 0.0; }
  // Linear: interpolates retained points. Step: holds the value of the last
  // point at or before t (right-continuous).
  double Evaluate(double t) const;
};

struct SimplifiedCurveSet {
  std::vector<SimplifiedCurve> curves;  // indexed by group id
  std::size_t grid_points = 0;          // 0 for exact step curves

  std::size_t RetainedPoints() const;
  // Distinct t values over all non-empty groups.
  std::vector<double> UnionPoints() const;
};

// Per group: resample the normalized curve on a uniform grid, smooth with a
// Gaussian truncated at +-4 sigma and renormalized at the support edges, and
// keep grid points where the first or second central difference changes
// sign, plus the support endpoints. Retained values are taken from the
// unsmoothed curve, so t = 0 and the support end are reproduced exactly.
SimplifiedCurveSet Simplify(const SerCurveSet& curves,
                            const ApproxParams& params);

// Lossless step representation (every breakpoint retained).
SimplifiedCurveSet ExactStepCurves(const SerCurveSet& curves);

// ID over the union of retained points. Between consecutive union points
// every curve is linear (or constant), so max - min is integrated exactly,
// splitting at curve crossings.
double IdFromSimplified(const SimplifiedCurveSet& simplified);

// alpha_min chosen on the union sub-intervals of the simplified curves and
// mapped onto the exact layout intervals (by interval midpoint). Writes the
// number of union sub-intervals compared to *points when non-null.
std::vector<GroupId> ApproxMinGroupPerInterval(
    const CurveLayout& layout, const SimplifiedCurveSet& simplified,
    std::size_t* points = nullptr);

}  // namespace idfair

#endif  // IDFAIR_APPROX_HPP_
