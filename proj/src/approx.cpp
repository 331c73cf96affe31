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

#include "idfair/approx.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "idfair/error.hpp"
#include "idfair/numeric.hpp"

namespace idfair {
namespace {

// -1, 0 or +1 with a dead band around zero.
int Sign(double v, double band) {
  if (v > band) return 1;
  if (v < -band) return -1;
  return 0;
}

std::vector<double> GaussianSmooth(const std::vector<double>& t,
                                   const std::vector<double>& v, double sigma) {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  const double reach = 4.0 * sigma;
  // Shifting the kernel down by its value at the cutoff makes it reach zero
  // there, so points entering or leaving the window cause no jump.
  const double floor = std::exp(-8.0);
  std::size_t lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (t[lo] < t[i] - reach) ++lo;
    double wsum = 0.0;
    double acc = 0.0;
    for (std::size_t j = lo; j < n && t[j] <= t[i] + reach; ++j) {
      const double z = (t[j] - t[i]) / sigma;
      const double w = std::max(0.0, std::exp(-0.5 * z * z) - floor);
      wsum += w;
      acc += w * v[j];
    }
    // Dividing by the in-range weight renormalizes the truncated kernel at
    // the support edges.
    out[i] = acc / wsum;
  }
  return out;
}

SimplifiedCurve SimplifyGroup(const SerCurveSet& curves, GroupId g,
                              const ApproxParams& params, std::size_t& grid_points) {
  SimplifiedCurve c;
  c.group = g;
  c.support_end = curves.layout().support_end(g);
  c.interpolation = Interpolation::kLinear;
  if (c.empty()) return c;
  const double s = c.support_end;
  const double h = params.grid_step;

  std::vector<double> t;
  for (std::size_t i = 0;; ++i) {
    const double x = static_cast<double>(i) * h;
    if (x > s) break;
    t.push_back(x);
  }
  if (t.back() < s) {
    // A final partial step would distort the central differences; keep the
    // support end as its own retained point instead.
    if (s - t.back() < 0.5 * h && t.size() > 1) t.back() = s;
    else t.push_back(s);
  }
  grid_points += t.size();

  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = curves.normalized_at(g, t[i]);

  std::vector<std::size_t> keep = {0};
  if (t.size() >= 3) {
    const std::vector<double> sm = GaussianSmooth(t, v, params.sigma);
    double scale = 0.0;
    for (double x : sm) scale = std::max(scale, std::abs(x));
    const double band1 = 1e-12 * scale / h;
    const double band2 = 1e-12 * scale / (h * h);
    int last1 = 0;
    int last2 = 0;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      const double hl = t[i] - t[i - 1];
      const double hr = t[i + 1] - t[i];
      const double d1 = (sm[i + 1] - sm[i - 1]) / (hl + hr);
      const double d2 =
          2.0 * ((sm[i + 1] - sm[i]) / hr - (sm[i] - sm[i - 1]) / hl) / (hl + hr);
      const int s1 = Sign(d1, band1);
      const int s2 = Sign(d2, band2);
      bool turn = false;
      if (s1 != 0) {
        turn = turn || (last1 != 0 && s1 != last1);
        last1 = s1;
      }
      if (s2 != 0) {
        turn = turn || (last2 != 0 && s2 != last2);
        last2 = s2;
      }
      if (turn) keep.push_back(i);
    }
  }
  if (t.size() > 1) keep.push_back(t.size() - 1);

  // Top up to min_points with evenly spaced grid points.
  if (keep.size() < params.min_points && t.size() > keep.size()) {
    const std::size_t want = std::min(params.min_points, t.size());
    for (std::size_t k = 0; k < want; ++k) {
      keep.push_back(k * (t.size() - 1) / (want - 1));
    }
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  }

  for (std::size_t i : keep) {
    c.t.push_back(t[i]);
    c.value.push_back(v[i]);
  }
  if (s < 1.0) {
    c.t.push_back(1.0);
    c.value.push_back(0.0);
  }
  return c;
}

std::vector<double> SortedUnion(const SimplifiedCurveSet& set) {
  std::vector<double> u;
  for (const auto& c : set.curves) {
    if (!c.empty()) u.insert(u.end(), c.t.begin(), c.t.end());
  }
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

// Exact integral over [0, 1] of max - min of lines a_g + (b_g - a_g) s,
// scaled by `width`.
double IntegrateGap(const std::vector<double>& a, const std::vector<double>& b,
                    double width) {
  std::vector<double> cuts = {0.0, 1.0};
  for (std::size_t p = 0; p < a.size(); ++p) {
    for (std::size_t q = p + 1; q < a.size(); ++q) {
      const double da = a[p] - a[q];
      const double db = b[p] - b[q];
      if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
        cuts.push_back(da / (da - db));
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  auto gap = [&](double s) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (std::size_t p = 0; p < a.size(); ++p) {
      const double v = a[p] + (b[p] - a[p]) * s;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi - lo;
  };
  CompensatedSum sum;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double w = cuts[k + 1] - cuts[k];
    if (w > 0.0) sum.Add(0.5 * w * (gap(cuts[k]) + gap(cuts[k + 1])));
  }
  return sum.Value() * width;
}

// Values of every candidate curve at both ends of [u0, u1]. Step curves hold
// their left value across the sub-interval.
void EndValues(const SimplifiedCurve& c, double u0, double u1, double& a,
               double& b) {
  a = c.Evaluate(u0);
  b = c.interpolation == Interpolation::kStep ? a : c.Evaluate(u1);
}

}  // namespace

void ApproxParams::Validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    Fail(ErrorKind::kParameter, "approximation sigma must be positive");
  }
  if (!(grid_step > 0.0 && grid_step < 1.0)) {
    Fail(ErrorKind::kParameter, "approximation grid_step must lie in (0, 1)");
  }
  if (min_points < 2) Fail(ErrorKind::kParameter, "min_points must be >= 2");
}

double SimplifiedCurve::Evaluate(double x) const {
  if (t.empty()) return 0.0;
  if (x <= t.front()) return value.front();
  if (x >= t.back()) return value.back();
  const auto it = std::upper_bound(t.begin(), t.end(), x);
  const auto k = static_cast<std::size_t>(it - t.begin()) - 1;
  if (interpolation == Interpolation::kStep || t[k] == x) return value[k];
  const double s = (x - t[k]) / (t[k + 1] - t[k]);
  return value[k] + s * (value[k + 1] - value[k]);
}

std::size_t SimplifiedCurveSet::RetainedPoints() const {
  std::size_t n = 0;
  for (const auto& c : curves) {
    if (c.empty()) continue;
    // The trailing (1, 0) pad lies outside the support and is not counted.
    for (double x : c.t) n += x <= c.support_end;
  }
  return n;
}

std::vector<double> SimplifiedCurveSet::UnionPoints() const {
  return SortedUnion(*this);
}

SimplifiedCurveSet Simplify(const SerCurveSet& curves, const ApproxParams& params) {
  params.Validate();
  double largest = -1.0;
  for (std::size_t g = 0; g < curves.num_groups(); ++g) {
    largest = std::max(largest, curves.layout().support_end(static_cast<GroupId>(g)));
  }
  if (std::floor(largest / params.grid_step) + 1.0 < 3.0) {
    Fail(ErrorKind::kParameter,
         fmt::format("grid step {} is too coarse for curve support {}",
                     params.grid_step, largest));
  }
  SimplifiedCurveSet out;
  for (std::size_t g = 0; g < curves.num_groups(); ++g) {
    out.curves.push_back(
        SimplifyGroup(curves, static_cast<GroupId>(g), params, out.grid_points));
  }
  return out;
}

SimplifiedCurveSet ExactStepCurves(const SerCurveSet& curves) {
  SimplifiedCurveSet out;
  const CurveLayout& layout = curves.layout();
  const auto b = layout.breakpoints();
  for (std::size_t g = 0; g < layout.num_groups(); ++g) {
    const auto gid = static_cast<GroupId>(g);
    SimplifiedCurve c;
    c.group = gid;
    c.interpolation = Interpolation::kStep;
    c.support_end = layout.support_end(gid);
    if (!c.empty()) {
      for (std::size_t k = 0; k < layout.num_intervals(); ++k) {
        if (layout.interval_count(gid, k) == 0) break;
        c.t.push_back(b[k]);
        c.value.push_back(curves.interval_normalized(gid, k));
      }
      if (c.t.empty() || c.t.back() < c.support_end) {
        c.t.push_back(c.support_end);
        c.value.push_back(curves.normalized_at(gid, c.support_end));
      }
      if (c.support_end < 1.0) {
        c.t.push_back(1.0);
        c.value.push_back(0.0);
      }
    }
    out.curves.push_back(std::move(c));
  }
  return out;
}

double IdFromSimplified(const SimplifiedCurveSet& simplified) {
  const std::vector<double> u = SortedUnion(simplified);
  CompensatedSum total;
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    a.clear();
    b.clear();
    for (const auto& c : simplified.curves) {
      if (c.empty() || c.support_end < u[i + 1]) continue;
      double va = 0.0;
      double vb = 0.0;
      EndValues(c, u[i], u[i + 1], va, vb);
      a.push_back(va);
      b.push_back(vb);
    }
    if (a.size() >= 2) total.Add(IntegrateGap(a, b, u[i + 1] - u[i]));
  }
  return total.Value();
}

std::vector<GroupId> ApproxMinGroupPerInterval(const CurveLayout& layout,
                                               const SimplifiedCurveSet& simplified,
                                               std::size_t* points) {
  const std::vector<double> u = SortedUnion(simplified);
  std::vector<GroupId> sub_min(u.size() > 0 ? u.size() - 1 : 0, -1);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double mid = 0.5 * (u[i] + u[i + 1]);
    double best = INFINITY;
    for (const auto& c : simplified.curves) {
      if (c.empty() || c.support_end < u[i + 1]) continue;
      const double v = c.interpolation == Interpolation::kStep ? c.Evaluate(u[i])
                                                               : c.Evaluate(mid);
      if (v < best) {
        best = v;
        sub_min[i] = c.group;
      }
    }
  }
  if (points) *points = sub_min.size();

  const auto bp = layout.breakpoints();
  std::vector<GroupId> out(layout.num_intervals(), -1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double mid = 0.5 * (bp[k] + bp[k + 1]);
    const auto it = std::upper_bound(u.begin(), u.end(), mid);
    if (it != u.begin() && it != u.end()) {
      out[k] = sub_min[static_cast<std::size_t>(it - u.begin()) - 1];
    }
    // The mapped group must be present on the exact interval; otherwise fall
    // back to the lowest-id non-empty group.
    if (out[k] < 0 || layout.interval_count(out[k], k) == 0) {
      out[k] = -1;
      for (std::size_t g = 0; g < layout.num_groups(); ++g) {
        if (layout.interval_count(static_cast<GroupId>(g), k) > 0) {
          out[k] = static_cast<GroupId>(g);
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace idfair
