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

// Acceptance run: one PASS/FAIL/SKIP line per criterion, exit status 1 when
// any criterion fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "idfair/approx_bench.hpp"
#include "idfair/curves.hpp"
#include "idfair/error.hpp"
#include "idfair/harness.hpp"
#include "idfair/idboost.hpp"
#include "idfair/losses.hpp"
#include "idfair/metrics.hpp"
#include "oracles.hpp"

using namespace idfair;
using namespace idfair::testing;

namespace {

int failures = 0;

void Report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  if (!pass) ++failures;
  fmt::print("[{}] criterion {:>2} {}: {} ({:.1f}s)\n", pass ? "PASS" : "FAIL", id, name,
             detail, seconds);
  std::fflush(stdout);
}

void Skip(int id, const std::string& name, const std::string& why) {
  fmt::print("[SKIP] criterion {:>2} {}: {}\n", id, name, why);
  std::fflush(stdout);
}

template <typename F>
void Timed(int id, const std::string& name, F body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Report(id, name, pass, detail, s);
}

SerCurveSet CurvesOf(const Instance& in) {
  auto layout = std::make_shared<const CurveLayout>(in.relevance, in.group_of, in.num_groups);
  return SerCurveSet(layout, in.targets, in.preds);
}

double IdLossAt(const Instance& in, const std::vector<double>& preds) {
  Instance moved = in;
  moved.preds = preds;
  return IdLossValue(CurvesOf(moved));
}

std::vector<GroupId> RegionAt(const Instance& in, const std::vector<double>& preds) {
  Instance moved = in;
  moved.preds = preds;
  return MinGroupPerInterval(CurvesOf(moved));
}

bool Counterexample(std::string& detail) {
  const std::vector<double> y = {1, 2, 3, 4};
  const auto ds = DatasetFromGroups(y, {0, 0, 1, 1}, 1);
  const auto phi = RelevanceFunction::Constant(1.0);
  const double a = IdLossValue(ds, std::vector<double>{1.2, 2.2, 3.3, 3.9}, phi);
  const double b = IdLossValue(ds, std::vector<double>{0.8, 1.8, 2.7, 4.1}, phi);
  const double mid = IdLossValue(ds, y, phi);
  detail = fmt::format("IDLoss(A)={:.15g} IDLoss(B)={:.15g} IDLoss(mid)={:.3g}", a, b, mid);
  return std::abs(a - 0.05) <= 1e-12 && std::abs(b - 0.05) <= 1e-12 && std::abs(mid) <= 1e-12;
}

bool Gradients(std::string& detail) {
  Rng rng(1002);
  const double h = 1e-6;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = rng.Bernoulli(0.5) ? 2 : 4;
    const Instance in = RandomInstance(rng, k + rng.Below(201 - k), k);
    const auto id = IdLossGradHess(CurvesOf(in), in.targets, in.preds, 0.0);
    const auto sera = SeraGradHess(in.targets, in.preds, in.relevance);
    const auto region = RegionAt(in, in.preds);
    for (std::size_t j = 0; j < in.preds.size(); ++j) {
      const double fd_sera = CentralDifference(
          [&](const auto& p) { return Sera(in.targets, p, in.relevance); }, in.preds, j, h);
      bad += !Close(sera.grad[j], fd_sera, 1e-5, 1e-4);
      auto up = in.preds;
      auto down = in.preds;
      up[j] += h;
      down[j] -= h;
      if (RegionAt(in, up) != region || RegionAt(in, down) != region) {
        ++skipped;
        continue;
      }
      ++checked;
      const double fd = CentralDifference([&](const auto& p) { return IdLossAt(in, p); },
                                          in.preds, j, h);
      worst = std::max(worst, std::abs(fd - id.grad[j]));
      bad += !Close(id.grad[j], fd, 1e-5, 1e-4);
    }
  }
  detail = fmt::format(
      "{} in-region IDLoss coordinates ({} straddle a region boundary), max |diff| {:.2e}, "
      "{} mismatches",
      checked, skipped, worst, bad);
  return bad == 0 && checked > 0;
}

bool SeraOracle(std::string& detail) {
  Rng rng(1003);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.Below(4);
    const Instance in = RandomInstance(rng, k + rng.Below(200), k);
    double closed = 0.0;
    for (std::size_t i = 0; i < in.targets.size(); ++i) {
      const double e = in.preds[i] - in.targets[i];
      closed += in.relevance[i] * e * e;
    }
    const double sweep = SeraFromCurves(CurvesOf(in));
    worst = std::max(worst, std::abs(closed - sweep) / std::abs(closed));
  }
  detail = fmt::format("max relative difference {:.2e} over 1000 instances", worst);
  return worst <= 1e-10;
}

struct GridStats {
  int ok = 0;
  // Instances whose deviation stays inside the midpoint rule's own error bound.
  int within_bound = 0;
  double worst = 0.0;
};

GridStats IdGrid(Rng& rng, const std::function<Instance(Rng&)>& make) {
  GridStats s;
  for (int trial = 0; trial < 100; ++trial) {
    const Instance in = make(rng);
    const double exact = IntersectionalDivergence(CurvesOf(in));
    const double grid = MidpointIntegral([&](double t) { return BruteGap(in, t); }, 1e-4);
    const double rel = std::abs(exact - grid) / exact;
    s.worst = std::max(s.worst, rel);
    s.ok += rel <= 2e-4;
    s.within_bound += std::abs(exact - grid) <= MidpointJumpBound(in, BruteGap, 1e-4) + 1e-12;
  }
  return s;
}

bool IdGridOracle(std::string& detail) {
  Rng rng(1004);
  const auto s = IdGrid(rng, [](Rng& r) { return RandomInstance(r, 30, 3); });
  detail = fmt::format(
      "{}/100 three-group n=30 instances within 2e-4, worst {:.2e}; {}/100 within the "
      "grid's own jump bound",
      s.ok, s.worst, s.within_bound);
  return s.ok == 100;
}

bool Imbalance(std::string& detail) {
  int ok = 0;
  double worst_bgl = 0.0;
  double min_id = INFINITY;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sc = SynthImbalancedScenario(500, 1.0, seed);
    const double bgl = DeltaBgl(sc.data, sc.predictions, 0);
    const double id =
        IntersectionalDivergence(SerCurveSet::Build(sc.data, sc.predictions, sc.relevance));
    worst_bgl = std::max(worst_bgl, bgl);
    min_id = std::min(min_id, id);
    ok += bgl <= 1e-9 && id > 0.0;
  }
  detail = fmt::format("{}/20 seeds, max dBGL {:.2e}, min ID {:.4g}", ok, worst_bgl, min_id);
  return ok == 20;
}

bool FairnessImprovement(std::string& detail) {
  int wins = 0;
  int sera_ok = 0;
  for (int s = 0; s < 20; ++s) {
    const auto ds = SynthBiased(2000, 2, 1000 + static_cast<std::uint64_t>(s));
    const auto phi = RelevanceFunction::FromBoxplot(ds.targets());
    const auto [train, test] = Split(ds, 0.8, static_cast<std::uint64_t>(s));
    BoostParams p;
    ObjectiveOptions o;
    o.relevance = phi;
    const auto mse = Fit(train, "mse", o, p).Predict(test);
    const auto sera = Fit(train, "sera", o, p).Predict(test);
    IdBoostOptions io;
    io.params = p;
    io.w = 0.5;
    const auto idb = FitIdBoost(train, phi, io).Predict(test);
    auto id = [&](const std::vector<double>& pr) {
      return IntersectionalDivergence(SerCurveSet::Build(test, pr, phi));
    };
    wins += id(idb) < id(mse);
    sera_ok += Sera(test, idb, phi) <= 1.25 * Sera(test, sera, phi);
  }
  detail = fmt::format("IDBoost_0.5 ID below MSE in {}/20 seeds (need 16), SERA within 25% "
                       "of the SERA ensemble in {}/20",
                       wins, sera_ok);
  return wins >= 16 && sera_ok == 20;
}

bool Descent(std::string& detail) {
  int rounds_ok = 0;
  int rounds = 0;
  int final_ok = 0;
  for (int s = 0; s < 20; ++s) {
    const auto ds = SynthBiased(1000, 2, 2000 + static_cast<std::uint64_t>(s));
    const auto phi = RelevanceFunction::FromBoxplot(ds.targets());
    BoostParams p;
    p.n_rounds = 50;
    p.learning_rate = 0.1;
    ObjectiveOptions o;
    o.relevance = phi;
    const auto model = Fit(ds, "idloss", o, p);
    const auto& trace = model.trace();
    for (std::size_t k = 1; k < trace.size(); ++k) rounds_ok += trace[k] <= trace[k - 1];
    rounds += static_cast<int>(trace.size()) - 1;
    final_ok += trace.back() < trace.front();
  }
  const double frac = static_cast<double>(rounds_ok) / rounds;
  detail = fmt::format("{:.1f}% of rounds non-increasing, final < initial in {}/20 seeds",
                       100.0 * frac, final_ok);
  return frac >= 0.95 && final_ok == 20;
}

std::size_t AttributeIndex(const GroupedDataset& ds, const std::string& name) {
  const auto& names = ds.attribute_names();
  for (std::size_t a = 0; a < names.size(); ++a) {
    if (names[a] == name) return a;
  }
  Fail(ErrorKind::kInput, "no protected attribute named '" + name + "'");
}

void RealData() {
  const char* csv = std::getenv("IDFAIR_COMPAS_CSV");
  const char* schema = std::getenv("IDFAIR_COMPAS_SCHEMA");
  if (!csv || !schema) {
    Skip(8, "real-data sign pattern",
         "set IDFAIR_COMPAS_CSV and IDFAIR_COMPAS_SCHEMA to run");
    return;
  }
  Timed(8, "real-data sign pattern", [&](std::string& detail) {
    const auto ds = LoadCsv(csv, DatasetSchema::Load(schema));
    const auto [train, test] = Split(ds, 0.8, 0);
    ObjectiveOptions o;
    o.relevance = RelevanceFunction::FromBoxplot(train.targets());
    const auto preds = Fit(train, "mse", o, BoostParams{}).Predict(test);
    const auto table =
        GroupMaeDeltaPct(test, preds, AttributeIndex(ds, "race"), AttributeIndex(ds, "sex"));
    // Rows: All, sex=priv, sex=unpriv.
    const auto& a = table.rows.at(1).delta_pct;
    const auto& b = table.rows.at(2).delta_pct;
    detail = fmt::format("race delta% {}: {}, {}: {}", table.rows[1].label,
                         a ? fmt::format("{:.1f}", *a) : "n/a", table.rows[2].label,
                         b ? fmt::format("{:.1f}", *b) : "n/a");
    return a && b && (*a) * (*b) < 0.0;
  });
}

bool ApproxBench(std::string& detail) {
  const auto ds = SynthBiased(2000, 1, 7);
  const auto phi = RelevanceFunction::FromBoxplot(ds.targets());
  const auto r = BenchApprox(ds, phi, BoostParams{}, 100);
  detail = fmt::format(
      "points {:+.1f}%, ID {:+.2f}%, SERA {:+.2f}%, time {:+.1f}% (exact {:.1f}s, fast {:.1f}s, "
      "not gated)",
      r.PointsDeltaPct(), r.IdDeltaPct(), r.SeraDeltaPct(), r.TimeDeltaPct(), r.exact.seconds,
      r.fast.seconds);
  return r.PointsDeltaPct() <= -50.0 && std::abs(r.IdDeltaPct()) < 5.0 &&
         std::abs(r.SeraDeltaPct()) < 5.0;
}

bool Axioms(std::string& detail) {
  Rng rng(1010);
  int bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.Below(3);
    const Instance in = RandomInstance(rng, k + rng.Below(80), k);
    const double id = IntersectionalDivergence(CurvesOf(in));
    bad += !(id >= 0.0);

    // Every group a copy of the same samples.
    Instance sym;
    sym.num_groups = k;
    const std::size_t m = 1 + rng.Below(20);
    std::vector<double> y(m), p(m), r(m);
    for (std::size_t i = 0; i < m; ++i) {
      y[i] = rng.Normal();
      p[i] = y[i] + rng.Normal();
      r[i] = rng.Uniform();
    }
    for (std::size_t g = 0; g < k; ++g) {
      for (std::size_t i = 0; i < m; ++i) {
        sym.targets.push_back(y[i]);
        sym.preds.push_back(p[i]);
        sym.relevance.push_back(r[i]);
        sym.group_of.push_back(static_cast<GroupId>(g));
      }
    }
    bad += !(std::abs(IntersectionalDivergence(CurvesOf(sym))) <= 1e-12);

    std::vector<GroupId> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = k; i > 1; --i) std::swap(perm[i - 1], perm[rng.Below(i)]);
    Instance relabeled = in;
    for (auto& g : relabeled.group_of) g = perm[static_cast<std::size_t>(g)];
    bad += !Close(IntersectionalDivergence(CurvesOf(relabeled)), id, 1e-15, 1e-12);

    const double c = rng.Uniform(0.1, 10.0);
    Instance scaled = in;
    for (std::size_t i = 0; i < in.preds.size(); ++i) {
      scaled.preds[i] = in.targets[i] + c * (in.preds[i] - in.targets[i]);
    }
    bad += !Close(IntersectionalDivergence(CurvesOf(scaled)), c * c * id, 1e-12, 1e-9);
    bad += !Close(Sera(scaled.targets, scaled.preds, scaled.relevance),
                  c * c * Sera(in.targets, in.preds, in.relevance), 1e-12, 1e-9);

    std::vector<double> xa(1 + rng.Below(30));
    std::vector<double> xb(1 + rng.Below(30));
    for (auto& v : xa) v = std::round(rng.Normal() * 3.0) / 3.0;
    for (auto& v : xb) v = std::round(rng.Normal() * 3.0) / 3.0;
    const double ks = KolmogorovSmirnov(xa, xb);
    bad += !(ks >= 0.0 && ks <= 1.0);

    // One run's ranks are a permutation of 1..n up to tie averaging.
    std::vector<double> scores(1 + rng.Below(8));
    for (auto& v : scores) v = static_cast<double>(rng.Below(4));
    const auto ranks = AverageRanks(scores);
    const double n = static_cast<double>(scores.size());
    bad += std::abs(std::accumulate(ranks.begin(), ranks.end(), 0.0) - n * (n + 1) / 2) > 1e-12;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      for (std::size_t j = 0; j < scores.size(); ++j) {
        bad += scores[i] < scores[j] && !(ranks[i] < ranks[j]);
        bad += scores[i] == scores[j] && ranks[i] != ranks[j];
      }
    }
  }
  const std::vector<double> a = {1, 2, 3};
  const std::vector<double> b = {2, 3, 4};
  const double ks = KolmogorovSmirnov(a, b);
  bad += std::abs(ks - 1.0 / 3.0) > 1e-15;
  detail = fmt::format("200 random instances, KS hand example {:.6f}, {} violations", ks, bad);
  return bad == 0;
}

}  // namespace

int main() {
  Timed(1, "non-convexity counterexample", Counterexample);
  Timed(2, "gradient correctness", Gradients);
  Timed(3, "SERA dual-method oracle", SeraOracle);
  Timed(4, "ID grid oracle", IdGridOracle);
  {
    // Informational: larger groups put bigger jumps near t = 1, which the
    // fixed-step midpoint rule cannot resolve to 2e-4.
    Rng rng(1104);
    const auto s = IdGrid(rng, [](Rng& r) {
      const std::size_t k = r.Bernoulli(0.5) ? 2 : 4;
      return RandomInstance(r, 20 + r.Below(181), k);
    });
    fmt::print("[INFO] criterion  4 wider family (n in [20,200], 2 or 4 groups): {}/100 "
               "within 2e-4, worst {:.2e}; {}/100 within the jump bound\n",
               s.ok, s.worst, s.within_bound);
  }
  Timed(5, "imbalance blindness", Imbalance);
  Timed(6, "fairness improvement", FairnessImprovement);
  Timed(7, "descent sanity", Descent);
  RealData();
  Timed(9, "approximation benchmark", ApproxBench);
  Timed(10, "metric axioms", Axioms);
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
