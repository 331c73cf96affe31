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

#include "idfair/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "idfair/error.hpp"
#include "idfair/numeric.hpp"

namespace idfair {
namespace {

bool IsMissingToken(const std::string& raw) {
  static const std::set<std::string> kMissing = {
      "", "NA", "N/A", "na", "NaN", "nan", "NAN", "null", "NULL", "None", "?"};
  return kMissing.count(Trim(raw)) != 0;
}

// Group ids by decreasing size; ties put the larger key first.
std::vector<GroupInfo> BuildCatalog(std::span<const std::uint8_t> bits,
                                    std::size_t n, std::size_t k,
                                    std::vector<GroupId>& group_of) {
  std::map<std::vector<std::uint8_t>, std::size_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint8_t> key(bits.begin() + static_cast<long>(i * k),
                                  bits.begin() + static_cast<long>((i + 1) * k));
    ++counts[key];
  }
  std::vector<GroupInfo> catalog;
  for (auto& [key, count] : counts) catalog.push_back({key, count});
  std::sort(catalog.begin(), catalog.end(),
            [](const GroupInfo& a, const GroupInfo& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.key > b.key;
            });
  std::map<std::vector<std::uint8_t>, GroupId> id_of;
  for (std::size_t g = 0; g < catalog.size(); ++g) {
    id_of[catalog[g].key] = static_cast<GroupId>(g);
  }
  group_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint8_t> key(bits.begin() + static_cast<long>(i * k),
                                  bits.begin() + static_cast<long>((i + 1) * k));
    group_of[i] = id_of[key];
  }
  return catalog;
}

double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return QuantileType7(values, 0.5);
}

}  // namespace

// ---------------------------------------------------------------------------
// DatasetSchema

DatasetSchema DatasetSchema::FromConfig(const KeyValueConfig& config) {
  DatasetSchema schema;
  schema.target_column = config.GetOr("target", "");
  schema.protected_columns = config.GetList("protected");
  schema.privileged_values = config.GetList("privileged");
  schema.drop_columns = config.GetList("drop");
  schema.Validate();
  return schema;
}

DatasetSchema DatasetSchema::Load(const std::filesystem::path& path) {
  return FromConfig(KeyValueConfig::Load(path));
}

void DatasetSchema::Validate() const {
  if (target_column.empty()) Fail(ErrorKind::kSchema, "no target column given");
  if (protected_columns.empty()) {
    Fail(ErrorKind::kSchema, "at least one protected column is required");
  }
  if (privileged_values.size() != protected_columns.size()) {
    Fail(ErrorKind::kSchema,
         fmt::format("{} privileged values for {} protected columns",
                     privileged_values.size(), protected_columns.size()));
  }
  std::set<std::string> seen;
  for (const auto& c : protected_columns) {
    if (c == target_column) {
      Fail(ErrorKind::kSchema, "target column '" + c + "' is also protected");
    }
    if (!seen.insert(c).second) {
      Fail(ErrorKind::kSchema, "protected column '" + c + "' listed twice");
    }
  }
  for (const auto& c : drop_columns) {
    if (c == target_column || seen.count(c)) {
      Fail(ErrorKind::kSchema, "column '" + c + "' cannot be dropped");
    }
  }
}

// ---------------------------------------------------------------------------
// GroupedDataset

GroupedDataset GroupedDataset::FromArrays(
    std::vector<double> features, std::vector<std::string> feature_names,
    std::vector<double> targets, std::span<const std::uint8_t> attribute_bits,
    std::vector<std::string> attribute_names) {
  const std::size_t n = targets.size();
  const std::size_t d = feature_names.size();
  const std::size_t k = attribute_names.size();
  if (n == 0) Fail(ErrorKind::kEmptyData, "dataset has no rows");
  if (k == 0) Fail(ErrorKind::kSchema, "at least one protected attribute is required");
  if (features.size() != n * d) {
    Fail(ErrorKind::kInput, fmt::format("feature matrix has {} values, expected {}",
                                        features.size(), n * d));
  }
  if (attribute_bits.size() != n * k) {
    Fail(ErrorKind::kInput, fmt::format("attribute matrix has {} values, expected {}",
                                        attribute_bits.size(), n * k));
  }
  for (auto b : attribute_bits) {
    if (b > 1) Fail(ErrorKind::kInput, "attribute bits must be 0 or 1");
  }
  for (double y : targets) {
    if (!std::isfinite(y)) Fail(ErrorKind::kInput, "non-finite target value");
  }
  GroupedDataset ds;
  ds.features_ = std::move(features);
  ds.feature_names_ = std::move(feature_names);
  ds.targets_ = std::move(targets);
  ds.attribute_names_ = std::move(attribute_names);
  ds.catalog_ = BuildCatalog(attribute_bits, n, k, ds.group_of_);
  ds.row_ids_.resize(n);
  std::iota(ds.row_ids_.begin(), ds.row_ids_.end(), std::size_t{0});
  return ds;
}

std::size_t GroupedDataset::num_nonempty_groups() const {
  return static_cast<std::size_t>(
      std::count_if(catalog_.begin(), catalog_.end(),
                    [](const GroupInfo& g) { return g.count > 0; }));
}

std::string GroupedDataset::GroupLabel(GroupId g) const {
  const auto& key = catalog_.at(static_cast<std::size_t>(g)).key;
  std::string label;
  for (std::size_t a = 0; a < key.size(); ++a) {
    if (a) label += "|";
    label += attribute_names_[a] + (key[a] ? "=priv" : "=unpriv");
  }
  return label;
}

GroupedDataset GroupedDataset::Subset(std::span<const std::size_t> rows) const {
  GroupedDataset out;
  const std::size_t d = num_features();
  out.feature_names_ = feature_names_;
  out.attribute_names_ = attribute_names_;
  out.catalog_ = catalog_;
  for (auto& g : out.catalog_) g.count = 0;
  out.features_.reserve(rows.size() * d);
  out.targets_.reserve(rows.size());
  out.group_of_.reserve(rows.size());
  out.row_ids_.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) Fail(ErrorKind::kInternal, "subset row out of range");
    const auto x = row(r);
    out.features_.insert(out.features_.end(), x.begin(), x.end());
    out.targets_.push_back(targets_[r]);
    out.group_of_.push_back(group_of_[r]);
    out.row_ids_.push_back(row_ids_[r]);
    ++out.catalog_[static_cast<std::size_t>(group_of_[r])].count;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loading

GroupedDataset LoadCsvTable(const CsvTable& table, const DatasetSchema& schema) {
  schema.Validate();
  auto require = [&](const std::string& name) {
    const auto c = table.Column(name);
    if (!c) Fail(ErrorKind::kSchema, "missing column '" + name + "'");
    return *c;
  };
  const std::size_t target_col = require(schema.target_column);
  std::vector<std::size_t> protected_cols;
  for (const auto& c : schema.protected_columns) protected_cols.push_back(require(c));
  std::set<std::size_t> excluded(protected_cols.begin(), protected_cols.end());
  excluded.insert(target_col);
  for (const auto& c : schema.drop_columns) excluded.insert(require(c));

  // Usable rows: finite target and present protected values.
  std::vector<std::size_t> usable;
  std::vector<double> targets;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    double y = 0.0;
    if (!ParseDouble(row[target_col], y)) continue;
    bool ok = true;
    for (std::size_t c : protected_cols) ok = ok && !IsMissingToken(row[c]);
    if (!ok) continue;
    usable.push_back(r);
    targets.push_back(y);
  }
  if (usable.empty()) Fail(ErrorKind::kEmptyData, "no usable rows");

  const std::size_t k = protected_cols.size();
  std::vector<std::uint8_t> bits(usable.size() * k);
  for (std::size_t a = 0; a < k; ++a) {
    const std::string privileged = Trim(schema.privileged_values[a]);
    std::set<std::string> observed;
    std::size_t n_priv = 0;
    for (std::size_t i = 0; i < usable.size(); ++i) {
      const std::string v = Trim(table.rows[usable[i]][protected_cols[a]]);
      observed.insert(v);
      const bool is_priv = v == privileged;
      bits[i * k + a] = is_priv ? 1 : 0;
      n_priv += is_priv;
    }
    const auto& name = schema.protected_columns[a];
    if (observed.size() < 2) {
      Fail(ErrorKind::kDegenerateAttribute,
           "protected column '" + name + "' has a single observed value");
    }
    if (n_priv == 0) {
      Fail(ErrorKind::kSchema, "privileged value '" + privileged +
                                   "' does not occur in column '" + name + "'");
    }
  }

  // Features: numeric when every present cell parses, else one-hot over the
  // sorted category set. Missing numeric cells take the column median.
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (excluded.count(c)) continue;
    std::vector<double> values(usable.size(), 0.0);
    std::vector<bool> present(usable.size(), false);
    std::vector<double> parsed;
    bool numeric = true;
    for (std::size_t i = 0; i < usable.size(); ++i) {
      const std::string& cell = table.rows[usable[i]][c];
      if (IsMissingToken(cell)) continue;
      double v = 0.0;
      if (ParseDouble(cell, v)) {
        values[i] = v;
        present[i] = true;
        parsed.push_back(v);
      } else {
        numeric = false;
        break;
      }
    }
    if (numeric) {
      const double fill = parsed.empty() ? 0.0 : Median(parsed);
      for (std::size_t i = 0; i < usable.size(); ++i) {
        if (!present[i]) values[i] = fill;
      }
      names.push_back(table.header[c]);
      columns.push_back(std::move(values));
      continue;
    }
    std::set<std::string> categories;
    for (std::size_t r : usable) {
      const std::string& cell = table.rows[r][c];
      if (!IsMissingToken(cell)) categories.insert(Trim(cell));
    }
    for (const auto& cat : categories) {
      std::vector<double> indicator(usable.size(), 0.0);
      for (std::size_t i = 0; i < usable.size(); ++i) {
        const std::string& cell = table.rows[usable[i]][c];
        if (!IsMissingToken(cell) && Trim(cell) == cat) indicator[i] = 1.0;
      }
      names.push_back(table.header[c] + "=" + cat);
      columns.push_back(std::move(indicator));
    }
  }
  std::vector<double> features(usable.size() * names.size());
  for (std::size_t i = 0; i < usable.size(); ++i) {
    for (std::size_t f = 0; f < names.size(); ++f) {
      features[i * names.size() + f] = columns[f][i];
    }
  }

  GroupedDataset ds = GroupedDataset::FromArrays(
      std::move(features), std::move(names), std::move(targets), bits,
      schema.protected_columns);
  for (std::size_t i = 0; i < usable.size(); ++i) ds.row_ids_[i] = usable[i];
  ds.dropped_rows_ = table.rows.size() - usable.size();
  return ds;
}

GroupedDataset LoadCsv(const std::filesystem::path& path,
                       const DatasetSchema& schema) {
  return LoadCsvTable(ReadCsv(path), schema);
}

DatasetSchema SavedSchema(const GroupedDataset& ds) {
  DatasetSchema schema;
  schema.target_column = "y";
  schema.protected_columns = ds.attribute_names();
  schema.privileged_values.assign(ds.num_attributes(), "1");
  return schema;
}

void SaveCsv(const GroupedDataset& ds, const std::filesystem::path& path) {
  std::vector<std::string> header = ds.feature_names();
  for (const auto& a : ds.attribute_names()) header.push_back(a);
  header.emplace_back("y");
  std::string text = CsvLine(header);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<std::string> fields;
    for (double x : ds.row(i)) fields.push_back(FormatExact(x));
    for (std::size_t a = 0; a < ds.num_attributes(); ++a) {
      fields.emplace_back(ds.privileged(i, a) ? "1" : "0");
    }
    fields.push_back(FormatExact(ds.targets()[i]));
    text += CsvLine(fields);
  }
  WriteTextFile(path, text);
}

// ---------------------------------------------------------------------------
// Splitting

std::pair<GroupedDataset, GroupedDataset> Split(const GroupedDataset& ds,
                                                double train_ratio,
                                                std::uint64_t seed,
                                                bool stratify_groups) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    Fail(ErrorKind::kParameter,
         fmt::format("train ratio {} outside (0, 1)", train_ratio));
  }
  Rng rng(seed);
  auto shuffle = [&rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[rng.Below(i)]);
    }
  };
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  if (stratify_groups) {
    std::vector<std::vector<std::size_t>> by_group(ds.num_groups());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      by_group[static_cast<std::size_t>(ds.group_of()[i])].push_back(i);
    }
    for (auto& rows : by_group) {
      shuffle(rows);
      const auto cut = static_cast<std::size_t>(
          std::llround(static_cast<double>(rows.size()) * train_ratio));
      train.insert(train.end(), rows.begin(), rows.begin() + static_cast<long>(cut));
      test.insert(test.end(), rows.begin() + static_cast<long>(cut), rows.end());
    }
  } else {
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    shuffle(rows);
    const auto cut = static_cast<std::size_t>(
        std::llround(static_cast<double>(rows.size()) * train_ratio));
    train.assign(rows.begin(), rows.begin() + static_cast<long>(cut));
    test.assign(rows.begin() + static_cast<long>(cut), rows.end());
  }
  if (train.empty() || test.empty()) {
    Fail(ErrorKind::kSplit,
         fmt::format("split of {} rows at ratio {} leaves an empty partition",
                     ds.size(), train_ratio));
  }
  return {ds.Subset(train), ds.Subset(test)};
}

// ---------------------------------------------------------------------------
// Synthetic data

ImbalancedScenario SynthImbalancedScenario(std::size_t n_per_group,
                                           double divergence,
                                           std::uint64_t seed) {
  if (n_per_group < 10) {
    Fail(ErrorKind::kParameter, "synthetic scenario needs >= 10 samples per group");
  }
  if (!(divergence >= 0.0) || !std::isfinite(divergence)) {
    Fail(ErrorKind::kParameter, "divergence must be a finite non-negative number");
  }
  Rng rng(seed);
  const std::size_t n = n_per_group;
  std::vector<double> y(n);
  for (auto& v : y) v = rng.Uniform();
  const double mean_y = AccurateSum(y) / static_cast<double>(n);

  // Both profiles average to 1 over the shared targets, so the two groups
  // carry the same total error; the mix moves mass toward high y for the
  // unprivileged group and toward low y for the privileged one.
  constexpr double kBaseError = 0.1;
  const double mix = divergence / (1.0 + divergence);
  std::vector<double> features;
  std::vector<double> targets;
  std::vector<double> preds;
  std::vector<std::uint8_t> bits;
  for (int privileged = 1; privileged >= 0; --privileged) {
    for (std::size_t k = 0; k < n; ++k) {
      const double shape = privileged ? (1.0 - y[k]) / (1.0 - mean_y)
                                      : y[k] / mean_y;
      const double err = kBaseError * ((1.0 - mix) + mix * shape);
      features.push_back(y[k] + 0.05 * rng.Normal());
      targets.push_back(y[k]);
      preds.push_back(y[k] - err);
      bits.push_back(static_cast<std::uint8_t>(privileged));
    }
  }
  ImbalancedScenario out{
      GroupedDataset::FromArrays(std::move(features), {"x1"}, std::move(targets),
                                 bits, {"group"}),
      std::move(preds),
      RelevanceFunction::FromPoints({{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}})};
  return out;
}

GroupedDataset SynthBiased(std::size_t n, std::size_t num_attributes,
                           std::uint64_t seed) {
  if (num_attributes < 1 || num_attributes > 2) {
    Fail(ErrorKind::kParameter, "biased generator supports 1 or 2 attributes");
  }
  if (n < 20) Fail(ErrorKind::kParameter, "biased generator needs n >= 20");
  Rng rng(seed);
  constexpr std::size_t kFeatures = 6;
  std::vector<std::string> names;
  for (std::size_t f = 0; f < kFeatures; ++f) names.push_back(fmt::format("x{}", f));
  names.emplace_back("proxy");
  const bool two = num_attributes == 2;

  std::vector<double> features;
  features.reserve(n * names.size());
  std::vector<double> targets(n);
  std::vector<std::uint8_t> bits;
  for (std::size_t i = 0; i < n; ++i) {
    // Bounded features keep the target tails densely sampled, so test
    // extremes stay inside the range seen in training.
    double x[kFeatures];
    for (double& v : x) v = rng.Uniform(-2.0, 2.0);
    const bool race = rng.Bernoulli(0.7);
    const bool sex = rng.Bernoulli(0.6);
    const double proxy =
        (race ? 0.0 : 1.0) + (two && !sex ? 0.5 : 0.0) + rng.Normal();

    double y = 2.0 * std::sin(1.5 * x[1]) + x[2] + 0.5 * x[3] * x[4];
    // Group effects live only where |x2| is large, i.e. at the extremes of
    // the target.
    const double tail = std::max(0.0, std::abs(x[2]) - 0.8);
    if (!race) y += 5.0 * tail * (x[2] > 0.0 ? 1.0 : -1.0);
    if (two && !sex) y -= 2.0 * tail;
    targets[i] = y + 0.2 * rng.Normal();

    for (double v : x) features.push_back(v);
    features.push_back(proxy);
    bits.push_back(static_cast<std::uint8_t>(race));
    if (two) bits.push_back(static_cast<std::uint8_t>(sex));
  }
  std::vector<std::string> attrs = {"race"};
  if (two) attrs = {"race", "sex"};
  return GroupedDataset::FromArrays(std::move(features), std::move(names),
                                    std::move(targets), bits, std::move(attrs));
}

}  // namespace idfair
