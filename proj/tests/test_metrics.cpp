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
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "idfair/error.hpp"
#include "idfair/metrics.hpp"
#include "oracles.hpp"

using namespace idfair;
using namespace idfair::testing;

namespace {

SerCurveSet CurvesOf(const Instance& in) {
  auto layout = std::make_shared<const CurveLayout>(in.relevance, in.group_of, in.num_groups);
  return SerCurveSet(layout, in.targets, in.preds);
}

// Sup of |F_a - F_b| checked at every observed value and just below it.
double BruteKs(const std::vector<double>& a, const std::vector<double>& b) {
  auto cdf = [](const std::vector<double>& v, double x) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double u) { return u <= x; })) /
           static_cast<double>(v.size());
  };
  std::vector<double> probes = a;
  probes.insert(probes.end(), b.begin(), b.end());
  double best = 0.0;
  for (double x : probes) {
    for (double p : {x, std::nextafter(x, -INFINITY)}) {
      best = std::max(best, std::abs(cdf(a, p) - cdf(b, p)));
    }
  }
  return best;
}

// Two attributes, rows laid out as (delta attr, condition attr, count, MAE).
// Every row misses its target by exactly the cell MAE.
struct Cell {
  bool race_priv;
  bool sex_priv;
  int count;
  double mae;
};

GroupedDataset CellDataset(const std::vector<Cell>& cells, std::vector<double>& preds) {
  std::vector<double> features;
  std::vector<double> targets;
  std::vector<std::uint8_t> bits;
  preds.clear();
  double y = 0.0;
  for (const auto& c : cells) {
    for (int i = 0; i < c.count; ++i) {
      features.push_back(y);
      targets.push_back(y);
      preds.push_back(y + ((i % 2) ? c.mae : -c.mae));
      bits.push_back(c.race_priv);
      bits.push_back(c.sex_priv);
      y += 1.0;
    }
  }
  return GroupedDataset::FromArrays(std::move(features), {"x"}, std::move(targets), bits,
                                    {"race", "sex"});
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("MSE and MAE") {
  const std::vector<double> y = {1, 2, 3};
  const std::vector<double> p = {2, 2, 1};
  CHECK(MeanSquaredError(y, p) == doctest::Approx(5.0 / 3.0));
  CHECK(MeanAbsoluteError(y, p) == doctest::Approx(1.0));
}

TEST_CASE("ID is zero when the groups hold identical error profiles") {
  Instance in;
  in.num_groups = 2;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const double y = rng.Normal();
    const double p = y + rng.Normal();
    const double r = rng.Uniform();
    for (GroupId g = 0; g < 2; ++g) {
      in.targets.push_back(y);
      in.preds.push_back(p);
      in.relevance.push_back(r);
      in.group_of.push_back(g);
    }
  }
  CHECK(IntersectionalDivergence(CurvesOf(in)) == 0.0);
}

TEST_CASE("ID matches midpoint grid integration of the brute-force gap") {
  // The three-group, thirty-sample example at the stated 2e-4 relative.
  Rng example(21);
  const Instance in30 = RandomInstance(example, 30, 3);
  const double exact30 = IntersectionalDivergence(CurvesOf(in30));
  const double grid30 = MidpointIntegral([&](double t) { return BruteGap(in30, t); }, 1e-4);
  CHECK(std::abs(exact30 - grid30) <= 2e-4 * exact30);

  // Random sizes: agreement up to the grid's own discretization error.
  Rng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = RandomInstance(rng, 10 + rng.Below(191), 2 + rng.Below(3));
    const double exact = IntersectionalDivergence(CurvesOf(in));
    const double grid = MidpointIntegral([&](double t) { return BruteGap(in, t); }, 1e-4);
    const double bound = MidpointJumpBound(in, BruteGap, 1e-4);
    CHECK(exact >= 0.0);
    CHECK(std::abs(exact - grid) <= bound + 1e-12 * exact);
  }
}

TEST_CASE("ID needs two groups") {
  Instance in;
  in.targets = {1, 2};
  in.preds = {1, 3};
  in.relevance = {0.5, 0.7};
  in.group_of = {0, 0};
  in.num_groups = 1;
  try {
    (void)IntersectionalDivergence(CurvesOf(in));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUndefinedMeasure);
  }
}

TEST_CASE("property: ID axioms on random instances") {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.Below(3);
    Instance in = RandomInstance(rng, k + rng.Below(60), k);
    const double id = IntersectionalDivergence(CurvesOf(in));
    CHECK(id >= 0.0);

    // Relabel groups by a random permutation.
    std::vector<GroupId> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = k; i > 1; --i) std::swap(perm[i - 1], perm[rng.Below(i)]);
    Instance relabeled = in;
    for (auto& g : relabeled.group_of) g = perm[static_cast<std::size_t>(g)];
    CHECK(IntersectionalDivergence(CurvesOf(relabeled)) == doctest::Approx(id).epsilon(1e-12));

    // Scaling every error by c scales ID and SERA by c^2.
    const double c = rng.Uniform(0.1, 10.0);
    Instance scaled = in;
    for (std::size_t i = 0; i < in.preds.size(); ++i) {
      scaled.preds[i] = in.targets[i] + c * (in.preds[i] - in.targets[i]);
    }
    CHECK(IntersectionalDivergence(CurvesOf(scaled)) ==
          doctest::Approx(c * c * id).epsilon(1e-9).scale(1e-12));
    CHECK(Sera(scaled.targets, scaled.preds, scaled.relevance) ==
          doctest::Approx(c * c * Sera(in.targets, in.preds, in.relevance)).epsilon(1e-9));
  }
}

TEST_CASE("KS statistic") {
  const std::vector<double> a = {1, 2, 3};
  const std::vector<double> b = {2, 3, 4};
  CHECK(KolmogorovSmirnov(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(BruteKs(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(KolmogorovSmirnov(a, a) == 0.0);
  const std::vector<double> far = {10, 11};
  CHECK(KolmogorovSmirnov(a, far) == 1.0);

  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(1 + rng.Below(30));
    std::vector<double> y(1 + rng.Below(30));
    // Coarse values so ties are common.
    for (auto& v : x) v = std::round(rng.Normal() * 3.0) / 3.0;
    for (auto& v : y) v = std::round((rng.Normal() + 0.3) * 3.0) / 3.0;
    const double ks = KolmogorovSmirnov(x, y);
    CHECK(ks >= 0.0);
    CHECK(ks <= 1.0);
    CHECK(ks == doctest::Approx(BruteKs(x, y)).epsilon(1e-12));
    CHECK(ks == KolmogorovSmirnov(y, x));
  }
}

TEST_CASE("delta BGL and statistical parity on a hand-built instance") {
  // Attribute bits: rows 0,1 privileged, rows 2,3 not.
  const std::vector<std::uint8_t> bits = {1, 1, 0, 0};
  const auto ds = GroupedDataset::FromArrays({0, 1, 2, 3}, {"x"}, {1, 2, 3, 4}, bits, {"a"});
  const std::vector<double> preds = {1.5, 2.5, 1.0, 4.0};
  // priv MAE = 0.5, unpriv MAE = (2 + 0) / 2 = 1.
  CHECK(DeltaBgl(ds, preds, 0) == doctest::Approx(0.5));
  // priv preds {1.5, 2.5}, unpriv {1.0, 4.0}.
  CHECK(StatisticalParity(ds, preds, 0) == doctest::Approx(0.5));

  // Second attribute is privileged on every row.
  const std::vector<std::uint8_t> one_sided = {1, 1, 1, 1, 0, 1, 0, 1};
  const auto ds2 = GroupedDataset::FromArrays({0, 1, 2, 3}, {"x"}, {1, 2, 3, 4}, one_sided,
                                              {"a", "b"});
  try {
    (void)DeltaBgl(ds2, preds, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUndefinedMeasure);
  }
  CHECK_THROWS_AS((void)StatisticalParity(ds2, preds, 1), Error);
}

TEST_CASE("MAE delta percentages reproduce the published arithmetic") {
  CHECK(MaeDeltaPct(0.275, 0.320) == doctest::Approx(-14.0625));
  CHECK(std::round(MaeDeltaPct(0.275, 0.320) * 10) / 10 == -14.1);
  CHECK(std::round(MaeDeltaPct(22203, 17505) * 10) / 10 == 26.8);
  CHECK(MaeDeltaPct(0.3, 0.3) == 0.0);
}

TEST_CASE("intersectional MAE table from the LSAC per-group MAEs") {
  std::vector<double> preds;
  const auto ds = CellDataset({{true, true, 17, 0.287},
                               {true, false, 12, 0.258},
                               {false, true, 24, 0.343},
                               {false, false, 23, 0.296}},
                              preds);
  const auto table = GroupMaeDeltaPct(ds, preds, 0, 1);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].label == "All");
  CHECK(*table.rows[0].mae_priv == doctest::Approx(0.275).epsilon(1e-12));
  CHECK(*table.rows[0].mae_unpriv == doctest::Approx(0.320).epsilon(1e-12));
  // Published: -14.1 / -16.3 / -12.8.
  CHECK(*table.rows[0].delta_pct == doctest::Approx(-14.0625).epsilon(1e-9));
  CHECK(*table.rows[1].delta_pct == doctest::Approx((0.287 - 0.343) / 0.343 * 100).epsilon(1e-9));
  CHECK(*table.rows[2].delta_pct == doctest::Approx((0.258 - 0.296) / 0.296 * 100).epsilon(1e-9));
  CHECK(std::round(*table.rows[1].delta_pct * 10) / 10 == -16.3);
  CHECK(std::round(*table.rows[2].delta_pct * 10) / 10 == -12.8);
  // Male row grows the disparity (red), Female row shrinks it (blue).
  CHECK(table.rows[0].trend == DeltaTrend::kReference);
  CHECK(table.rows[1].trend == DeltaTrend::kIncrease);
  CHECK(table.rows[2].trend == DeltaTrend::kDecrease);
}

TEST_CASE("an empty conditioned subgroup is flagged, not thrown") {
  std::vector<double> preds;
  const auto ds = CellDataset({{true, true, 5, 0.2}, {false, true, 5, 0.3}, {true, false, 4, 0.1}},
                              preds);
  const auto table = GroupMaeDeltaPct(ds, preds, 0, 1);
  REQUIRE(table.rows.size() == 3);
  CHECK_FALSE(table.rows[2].mae_unpriv.has_value());
  CHECK_FALSE(table.rows[2].delta_pct.has_value());
  CHECK(table.rows[2].trend == DeltaTrend::kUndefined);
}

TEST_CASE("full report: perfect predictions, imbalance blindness, serialization") {
  const auto s = SynthImbalancedScenario(100, 2.0, 1);
  const auto perfect = FullReport(s.data, s.data.targets(), s.relevance);
  CHECK(perfect.mse == 0.0);
  CHECK(perfect.sera == 0.0);
  CHECK(*perfect.id == 0.0);
  CHECK(*perfect.delta_bgl == 0.0);

  const auto r = FullReport(s.data, s.predictions, s.relevance);
  CHECK(*r.delta_bgl <= 1e-9);
  CHECK(*r.id > 0.0);
  CHECK(r.group_mae.size() == s.data.num_groups());

  const std::string json = r.ToJson();
  CHECK(FairnessReport::FromJson(json).ToJson() == json);
  CHECK(FairnessReport::CsvHeader() == "n,id,sera,mse,mae,delta_bgl,sp\n");
}

TEST_CASE("report-level fairness values average the per-attribute ones") {
  const auto ds = SynthBiased(300, 2, 4);
  Rng rng(5);
  std::vector<double> preds(ds.targets().begin(), ds.targets().end());
  for (auto& p : preds) p += rng.Normal();
  const auto phi = RelevanceFunction::FromBoxplot(ds.targets());
  const auto r = FullReport(ds, preds, phi);
  REQUIRE(r.attributes.size() == 2);
  CHECK(*r.delta_bgl == doctest::Approx((DeltaBgl(ds, preds, 0) + DeltaBgl(ds, preds, 1)) / 2));
  CHECK(*r.sp == doctest::Approx((StatisticalParity(ds, preds, 0) +
                                  StatisticalParity(ds, preds, 1)) / 2));
  CHECK(*r.sp >= 0.0);
  CHECK(*r.sp <= 1.0);
  CHECK(r.mae_delta_tables.size() == 2);
  CHECK(r.errors.empty());
}

}  // TEST_SUITE
