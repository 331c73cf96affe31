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

#ifndef IDFAIR_DATASET_HPP_
#define IDFAIR_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "idfair/io.hpp"
#include "idfair/relevance.hpp"

namespace idfair {

using GroupId = int;

struct DatasetSchema {
  std::string target_column;
  std::vector<std::string> protected_columns;
  // Aligned with protected_columns.
  std::vector<std::string> privileged_values;
  std::vector<std::string> drop_columns;

  // Keys: target, protected, privileged, drop.
  static DatasetSchema FromConfig(const KeyValueConfig& config);
  static DatasetSchema Load(const std::filesystem::path& path);

  // Structural checks that do not need the data.
  void Validate() const;
};

// One observed combination of binarized protected attributes.
struct GroupInfo {
  // key[a] == 1 when the sample holds the privileged value of attribute a.
  std::vector<std::uint8_t> key;
  std::size_t count = 0;
};

// Feature matrix, targets and intersectional group assignment.
//
// Group ids index group_catalog(). Ids are ordered by decreasing group size
// in the dataset the catalog was built from; ties put the lexicographically
// larger key (more privileged attributes first) ahead. Subsets keep the
// parent catalog with recomputed counts, so ids stay comparable across
// train/test partitions.
class GroupedDataset {
 public:
  GroupedDataset() = default;

  // `features` is row-major n x feature_names.size();
  // attribute_bits is row-major n x attribute_names.size() with 0/1 entries.
  static GroupedDataset FromArrays(std::vector<double> features,
                                   std::vector<std::string> feature_names,
                                   std::vector<double> targets,
                                   std::span<const std::uint8_t> attribute_bits,
                                   std::vector<std::string> attribute_names);

  std::size_t size() const { return targets_.size(); }
  std::size_t num_features() const { return feature_names_.size(); }
  std::size_t num_attributes() const { return attribute_names_.size(); }
  std::size_t num_groups() const { return catalog_.size(); }
  // Groups with at least one sample.
  std::size_t num_nonempty_groups() const;

  std::span<const double> features() const { return features_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features_).subspan(i * num_features(),
                                                      num_features());
  }
  std::span<const double> targets() const { return targets_; }
  std::span<const GroupId> group_of() const { return group_of_; }
  std::span<const std::size_t> row_ids() const { return row_ids_; }
  const std::vector<GroupInfo>& group_catalog() const { return catalog_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }
  const std::vector<std::string>& attribute_names() const {
    return attribute_names_;
  }

  bool privileged(std::size_t i, std::size_t attribute) const {
    return catalog_[static_cast<std::size_t>(group_of_[i])].key[attribute] != 0;
  }
  // Readable group label, e.g. "sex=priv|race=unpriv".
  std::string GroupLabel(GroupId g) const;

  // Rows removed while loading (unparseable target or protected value).
  std::size_t dropped_rows() const { return dropped_rows_; }

  // Rows in the given order, keeping this dataset's group catalog.
  GroupedDataset Subset(std::span<const std::size_t> rows) const;

 private:
  friend GroupedDataset LoadCsvTable(const CsvTable& table,
                                     const DatasetSchema& schema);

  std::vector<double> features_;
  std::vector<std::string> feature_names_;
  std::vector<double> targets_;
  std::vector<GroupId> group_of_;
  std::vector<std::size_t> row_ids_;
  std::vector<GroupInfo> catalog_;
  std::vector<std::string> attribute_names_;
  std::size_t dropped_rows_ = 0;
};

GroupedDataset LoadCsv(const std::filesystem::path& path,
                       const DatasetSchema& schema);
GroupedDataset LoadCsvTable(const CsvTable& table, const DatasetSchema& schema);

// Writes features, protected attributes (as 1/0) and the target `y`.
void SaveCsv(const GroupedDataset& ds, const std::filesystem::path& path);
// Schema matching SaveCsv output.
DatasetSchema SavedSchema(const GroupedDataset& ds);

// Uniform shuffle by seed, first round(n * train_ratio) rows to train. With
// stratify_groups the shuffle and cut are done per group instead.
std::pair<GroupedDataset, GroupedDataset> Split(const GroupedDataset& ds,
                                                double train_ratio,
                                                std::uint64_t seed,
                                                bool stratify_groups = false);

struct ImbalancedScenario {
  GroupedDataset data;
  std::vector<double> predictions;
  RelevanceFunction relevance;
};

// Two groups over the same targets and the same total absolute error, with
// the unprivileged group's error shifted toward high-relevance (high) targets
// as `divergence` grows. Relevance rises linearly-in-shape from 0 at y=0 to 1
// at y=1.
ImbalancedScenario SynthImbalancedScenario(std::size_t n_per_group,
                                           double divergence,
                                           std::uint64_t seed);

// Regression data with 1 or 2 binary protected attributes, unequal group
// sizes, a proxy feature correlated with the attributes and a
// group-dependent target shift concentrated at the extremes. Models see only
// the features, never the attributes.
GroupedDataset SynthBiased(std::size_t n, std::size_t num_attributes,
                           std::uint64_t seed);

}  // namespace idfair

#endif  // IDFAIR_DATASET_HPP_
