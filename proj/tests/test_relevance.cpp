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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "idfair/error.hpp"
#include "idfair/numeric.hpp"
#include "idfair/relevance.hpp"
#include "oracles.hpp"

using namespace idfair;
using idfair::testing::HermiteFlat;

TEST_SUITE("relevance") {

TEST_CASE("type-7 quantiles interpolate between order statistics") {
  const std::vector<double> v = {1, 2, 3, 4};
  CHECK(QuantileType7(v, 0.0) == 1.0);
  CHECK(QuantileType7(v, 1.0) == 4.0);
  CHECK(QuantileType7(v, 0.5) == doctest::Approx(2.5));
  // h = 3 * 0.25 = 0.75 -> 1 + 0.75.
  CHECK(QuantileType7(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("boxplot control points sit on the fences and the median") {
  Rng rng(11);
  std::vector<double> ys;
  for (int i = 0; i < 400; ++i) ys.push_back(rng.Normal());
  ys.push_back(9.0);  // beyond the upper fence
  ys.push_back(-9.0);
  const auto phi = RelevanceFunction::FromBoxplot(ys);
  const auto& cp = phi.control_points();
  REQUIRE(cp.size() == 3);

  std::vector<double> sorted = ys;
  std::sort(sorted.begin(), sorted.end());
  const double q1 = QuantileType7(sorted, 0.25);
  const double med = QuantileType7(sorted, 0.5);
  const double q3 = QuantileType7(sorted, 0.75);
  CHECK(cp[0].y == doctest::Approx(q1 - 1.5 * (q3 - q1)));
  CHECK(cp[1].y == doctest::Approx(med));
  CHECK(cp[2].y == doctest::Approx(q3 + 1.5 * (q3 - q1)));

  CHECK(phi(med) == 0.0);
  CHECK(phi(sorted.front()) == 1.0);
  CHECK(phi(sorted.back()) == 1.0);

  // Midway between the median and the upper whisker, against the direct formula.
  const double x = 0.5 * (cp[1].y + cp[2].y);
  const double expected = HermiteFlat(cp[1].y, cp[2].y, 0.0, 1.0, x);
  CHECK(phi(x) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(phi(x) > 0.0);
  CHECK(phi(x) < 1.0);
}

TEST_CASE("whiskers clamp to the observed range") {
  const std::vector<double> ys = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto phi = RelevanceFunction::FromBoxplot(ys);
  CHECK(phi.control_points().front().y == 0.0);
  CHECK(phi.control_points().back().y == 9.0);
  CHECK(phi(0.0) == 1.0);
  CHECK(phi(9.0) == 1.0);
}

TEST_CASE("degenerate target samples are rejected") {
  const std::vector<double> same(10, 3.0);
  try {
    (void)RelevanceFunction::FromBoxplot(same);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateDistribution);
  }
  const std::vector<double> four = {1, 2, 3, 4, 4, 4};
  CHECK_THROWS_AS((void)RelevanceFunction::FromBoxplot(four), Error);
}

TEST_CASE("explicit control points") {
  const auto ramp = RelevanceFunction::FromPoints({{0, 0, 0}, {1, 1, 0}});
  CHECK(ramp(0.5) > 0.0);
  CHECK(ramp(0.5) < 1.0);
  double prev = -1.0;
  for (int k = 0; k <= 1000; ++k) {
    const double v = ramp(k / 1000.0);
    CHECK(v >= prev);
    prev = v;
  }

  const auto valley = RelevanceFunction::FromPoints({{0, 1, 0}, {5, 0, 0}, {10, 1, 0}});
  CHECK(valley(5.0) == 0.0);
  CHECK(valley(0.0) == 1.0);
  CHECK(valley(10.0) == 1.0);
  CHECK(valley(2.5) == doctest::Approx(HermiteFlat(0, 5, 1, 0, 2.5)).epsilon(1e-12));
  CHECK(valley(-1e300) == 1.0);
  CHECK(valley(1e300) == 1.0);
}

TEST_CASE("slopes inside the monotone region are kept, steep ones are limited") {
  // Tangent equal to the secant: the cubic collapses to the straight line.
  const auto line = RelevanceFunction::FromPoints({{0, 0, 1}, {1, 1, 1}});
  for (double x : {0.1, 0.37, 0.5, 0.9}) CHECK(line(x) == doctest::Approx(x).epsilon(1e-14));

  const auto steep = RelevanceFunction::FromPoints({{0, 0, 10}, {1, 1, 10}});
  const auto& m = steep.limited_slopes();
  CHECK(m[0] * m[0] + m[1] * m[1] <= doctest::Approx(9.0));
  for (int k = 0; k <= 1000; ++k) {
    const double v = steep(k / 1000.0);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("invalid control points") {
  CHECK_THROWS_AS((void)RelevanceFunction::FromPoints({{0, 0, 0}}), Error);
  CHECK_THROWS_AS((void)RelevanceFunction::FromPoints({{0, 0, 0}, {0, 1, 0}}), Error);
  CHECK_THROWS_AS((void)RelevanceFunction::FromPoints({{0, 0, 0}, {1, 1.5, 0}}), Error);
  const auto phi = RelevanceFunction::FromPoints({{0, 0, 0}, {1, 1, 0}});
  try {
    (void)phi(std::nan(""));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInput);
  }
}

TEST_CASE("property: range, interpolation and monotone segments on random control points") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.Below(6));
    std::vector<ControlPoint> pts;
    double y = rng.Uniform(-5, 5);
    for (int i = 0; i < k; ++i) {
      // Occasionally repeat the previous relevance to exercise flat segments.
      const double r = (i > 0 && rng.Bernoulli(0.2)) ? pts.back().relevance : rng.Uniform();
      pts.push_back({y, r, rng.Bernoulli(0.5) ? rng.Uniform(-3, 3) : 0.0});
      y += rng.Uniform(0.1, 3.0);
    }
    const auto phi = RelevanceFunction::FromPoints(pts);
    for (const auto& p : pts) CHECK(phi(p.y) == p.relevance);
    CHECK(phi(pts.front().y - 1e6) == pts.front().relevance);
    CHECK(phi(pts.back().y + 1e6) == pts.back().relevance);
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const double lo = std::min(pts[s].relevance, pts[s + 1].relevance);
      const double hi = std::max(pts[s].relevance, pts[s + 1].relevance);
      const bool up = pts[s + 1].relevance >= pts[s].relevance;
      double prev = pts[s].relevance;
      for (int j = 1; j < 200; ++j) {
        const double x = pts[s].y + (pts[s + 1].y - pts[s].y) * j / 200.0;
        const double v = phi(x);
        CHECK(v >= lo);
        CHECK(v <= hi);
        if (lo == hi) CHECK(v == lo);
        CHECK((up ? v >= prev - 1e-15 : v <= prev + 1e-15));
        prev = v;
      }
    }
  }
}

TEST_CASE("control points round-trip through CSV") {
  const auto path = std::filesystem::temp_directory_path() / "idfair_relevance_rt.csv";
  const auto phi = RelevanceFunction::FromPoints({{-1, 1, 0}, {0.25, 0, 0.5}, {3, 0.75, 0}});
  phi.SaveCsv(path);
  const auto back = RelevanceFunction::LoadCsv(path);
  REQUIRE(back.control_points().size() == 3);
  for (double x = -2; x < 4; x += 0.01) CHECK(back(x) == phi(x));
  std::filesystem::remove(path);
}

}  // TEST_SUITE
