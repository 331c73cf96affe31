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
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "idfair/curves.hpp"
#include "idfair/dataset.hpp"
#include "idfair/error.hpp"
#include "idfair/metrics.hpp"
#include "idfair/numeric.hpp"

using namespace idfair;

namespace {

DatasetSchema Schema(std::vector<std::string> prot, std::vector<std::string> priv) {
  DatasetSchema s;
  s.target_column = "y";
  s.protected_columns = std::move(prot);
  s.privileged_values = std::move(priv);
  return s;
}

ErrorKind KindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an idfair::Error");
  return ErrorKind::kInternal;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("CSV loading binarizes attributes and orders groups by size") {
  const std::string csv =
      "sex,race,y,x1\n"
      "M,W,1.0,0.5\n"
      "F,W,2.0,0.1\n"
      "M,B,3.0,0.2\n"
      "M,W,4.0,0.3\n"
      "F,B,5.0,0.4\n"
      "M,W,6.0,0.6\n"
      "F,W,7.0,0.7\n";
  const auto schema = Schema({"sex", "race"}, {"M", "W"});
  const auto ds = LoadCsvTable(ParseCsv(csv), schema);
  REQUIRE(ds.size() == 7);
  CHECK(ds.num_groups() == 4);
  CHECK(ds.num_features() == 1);
  // (M,W)=3, (F,W)=2, then the two singletons with the larger key first.
  CHECK(ds.group_catalog()[0].count == 3);
  CHECK(ds.group_catalog()[1].count == 2);
  CHECK(ds.GroupLabel(0) == "sex=priv|race=priv");
  CHECK(ds.GroupLabel(1) == "sex=unpriv|race=priv");
  CHECK(ds.privileged(0, 0));
  CHECK(ds.privileged(0, 1));
  CHECK_FALSE(ds.privileged(1, 0));

  const auto again = LoadCsvTable(ParseCsv(csv), schema);
  CHECK(std::equal(ds.group_of().begin(), ds.group_of().end(), again.group_of().begin()));
}

TEST_CASE("group sizes of a four-group file come out in decreasing order") {
  // Sizes from the COMPAS row of the dataset table, interleaved in the file.
  const std::vector<std::pair<std::string, int>> cells = {
      {"Female,Other", 759}, {"Male,Caucasian", 2377}, {"Male,Other", 4813},
      {"Female,Caucasian", 1100}};
  std::string csv = "sex,race,y\n";
  int y = 0;
  for (const auto& [key, count] : cells) {
    for (int i = 0; i < count; ++i) csv += key + "," + std::to_string(y++ % 10) + "\n";
  }
  const auto ds =
      LoadCsvTable(ParseCsv(csv), Schema({"sex", "race"}, {"Male", "Caucasian"}));
  std::vector<std::size_t> sizes;
  for (const auto& g : ds.group_catalog()) sizes.push_back(g.count);
  CHECK(sizes == std::vector<std::size_t>{4813, 2377, 1100, 759});
}

TEST_CASE("rows with a missing target or protected value are dropped") {
  const std::string csv =
      "a,y,x\n"
      "1,1.0,3\n"
      "0,NA,4\n"
      "1,2.0,\n"
      ",3.0,5\n"
      "0,4.0,7\n";
  const auto ds = LoadCsvTable(ParseCsv(csv), Schema({"a"}, {"1"}));
  CHECK(ds.size() == 3);
  CHECK(ds.dropped_rows() == 2);
  CHECK(std::vector<std::size_t>(ds.row_ids().begin(), ds.row_ids().end()) ==
        std::vector<std::size_t>{0, 2, 4});
  // The empty feature cell takes the median of {3, 7}.
  CHECK(ds.row(1)[0] == 5.0);
}

TEST_CASE("categorical features are one-hot encoded in sorted order") {
  const std::string csv =
      "a,y,color\n"
      "1,1,red\n"
      "0,2,blue\n"
      "1,3,green\n"
      "0,4,red\n";
  const auto ds = LoadCsvTable(ParseCsv(csv), Schema({"a"}, {"1"}));
  CHECK(ds.feature_names() ==
        std::vector<std::string>{"color=blue", "color=green", "color=red"});
  CHECK(std::vector<double>(ds.row(0).begin(), ds.row(0).end()) ==
        std::vector<double>{0, 0, 1});
  CHECK(std::vector<double>(ds.row(1).begin(), ds.row(1).end()) ==
        std::vector<double>{1, 0, 0});
}

TEST_CASE("schema errors") {
  const std::string csv = "a,y\n1,1\n0,2\n";
  CHECK(KindOf([&] { (void)LoadCsvTable(ParseCsv(csv), Schema({"b"}, {"1"})); }) ==
        ErrorKind::kSchema);
  try {
    (void)LoadCsvTable(ParseCsv(csv), Schema({"missing_col"}, {"1"}));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("missing_col") != std::string::npos);
  }
  CHECK(KindOf([&] { (void)LoadCsvTable(ParseCsv("a,y\n1,1\n1,2\n"), Schema({"a"}, {"1"})); }) ==
        ErrorKind::kDegenerateAttribute);
  CHECK(KindOf([&] { (void)LoadCsvTable(ParseCsv("a,y\n1,NA\n0,x\n"), Schema({"a"}, {"1"})); }) ==
        ErrorKind::kEmptyData);
  CHECK(KindOf([&] { (void)LoadCsvTable(ParseCsv(csv), Schema({"a"}, {"7"})); }) ==
        ErrorKind::kSchema);
  CHECK(KindOf([&] { (void)LoadCsvTable(ParseCsv(csv), Schema({"y"}, {"1"})); }) ==
        ErrorKind::kSchema);
}

TEST_CASE("schema config file keys") {
  const auto cfg = KeyValueConfig::Parse(
      "target = score\nprotected = sex, race\nprivileged = Male,White\ndrop = id\n");
  const auto s = DatasetSchema::FromConfig(cfg);
  CHECK(s.target_column == "score");
  CHECK(s.protected_columns == std::vector<std::string>{"sex", "race"});
  CHECK(s.privileged_values == std::vector<std::string>{"Male", "White"});
  CHECK(s.drop_columns == std::vector<std::string>{"id"});
}

TEST_CASE("saving and reloading is a fixed point of binarization") {
  const auto ds = SynthBiased(200, 2, 5);
  const auto path = std::filesystem::temp_directory_path() / "idfair_ds_rt.csv";
  SaveCsv(ds, path);
  const auto back = LoadCsv(path, SavedSchema(ds));
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.targets()[i] == ds.targets()[i]);
    for (std::size_t a = 0; a < 2; ++a) CHECK(back.privileged(i, a) == ds.privileged(i, a));
    for (std::size_t f = 0; f < ds.num_features(); ++f) CHECK(back.row(i)[f] == ds.row(i)[f]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("split sizes, determinism and seed sensitivity") {
  const auto ds = SynthBiased(100, 1, 3);
  const auto [a_train, a_test] = Split(ds, 0.8, 7);
  const auto [b_train, b_test] = Split(ds, 0.8, 7);
  CHECK(a_train.size() == 80);
  CHECK(a_test.size() == 20);
  CHECK(std::equal(a_train.row_ids().begin(), a_train.row_ids().end(),
                   b_train.row_ids().begin()));
  const auto [c_train, c_test] = Split(ds, 0.8, 1);
  const auto [d_train, d_test] = Split(ds, 0.8, 2);
  CHECK_FALSE(std::equal(c_train.row_ids().begin(), c_train.row_ids().end(),
                         d_train.row_ids().begin()));

  const std::vector<std::uint8_t> bit = {1};
  const auto tiny = GroupedDataset::FromArrays({0.0}, {"x"}, {1.0}, bit, {"a"});
  CHECK(KindOf([&] { (void)Split(tiny, 0.8, 0); }) == ErrorKind::kSplit);
}

TEST_CASE("property: partitions and splits conserve rows and keep the catalog") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = 20 + rng.Below(300);
    const auto ds = SynthBiased(n, 1 + rng.Below(2), rng.Below(1000));
    std::size_t total = 0;
    for (const auto& g : ds.group_catalog()) total += g.count;
    CHECK(total == ds.size());
    for (GroupId g : ds.group_of()) {
      CHECK(g >= 0);
      CHECK(static_cast<std::size_t>(g) < ds.num_groups());
    }

    const bool stratify = rng.Bernoulli(0.5);
    const auto [train, test] = Split(ds, rng.Uniform(0.2, 0.8), rng.Below(1000), stratify);
    CHECK(train.num_groups() == ds.num_groups());
    CHECK(test.num_groups() == ds.num_groups());
    std::vector<std::size_t> ids(train.row_ids().begin(), train.row_ids().end());
    ids.insert(ids.end(), test.row_ids().begin(), test.row_ids().end());
    std::sort(ids.begin(), ids.end());
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    CHECK(ids == all);
    for (std::size_t g = 0; g < ds.num_groups(); ++g) {
      CHECK(train.group_catalog()[g].count + test.group_catalog()[g].count ==
            ds.group_catalog()[g].count);
    }
  }
}

TEST_CASE("imbalanced scenario: equal totals, skewed by divergence, deterministic") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = SynthImbalancedScenario(200, 1.5, seed);
    CHECK(s.data.size() == 400);
    CHECK(DeltaBgl(s.data, s.predictions, 0) <= 1e-9);
    const auto curves = SerCurveSet::Build(s.data, s.predictions, s.relevance);
    CHECK(IntersectionalDivergence(curves) > 0.0);
  }
  const auto flat = SynthImbalancedScenario(100, 0.0, 4);
  const auto curves = SerCurveSet::Build(flat.data, flat.predictions, flat.relevance);
  CHECK(IntersectionalDivergence(curves) <= 1e-12);

  const auto a = SynthImbalancedScenario(50, 2.0, 9);
  const auto b = SynthImbalancedScenario(50, 2.0, 9);
  CHECK(a.predictions == b.predictions);
  CHECK(KindOf([] { (void)SynthImbalancedScenario(5, 1.0, 0); }) == ErrorKind::kParameter);
}

}  // TEST_SUITE
