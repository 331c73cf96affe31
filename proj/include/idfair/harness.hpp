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

#ifndef IDFAIR_HARNESS_HPP_
#define IDFAIR_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idfair/dataset.hpp"
#include "idfair/gbt.hpp"
#include "idfair/io.hpp"
#include "idfair/metrics.hpp"
#include "idfair/relevance.hpp"

namespace idfair {

// A model entry of an experiment: "mse", "huber", "sera", "idloss" (single
// ensembles) or "idboost_<w>" (e.g. idboost_0.5).
struct ModelSpec {
  std::string name;
  std::string objective;  // for single ensembles
  bool idboost = false;
  double w = 0.0;

  static ModelSpec Parse(const std::string& text);
};

// Metric names accepted in experiment configs.
const std::vector<std::string>& KnownMetrics();
// Value of a named metric from a report; nullopt when undefined there.
std::optional<double> MetricValue(const FairnessReport& report,
                                  const std::string& metric);

struct ExperimentConfig {
  std::filesystem::path data;
  DatasetSchema schema;
  std::vector<ModelSpec> models;
  int runs = 20;
  double train_ratio = 0.8;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics = {"mse", "sera", "delta_bgl", "sp", "id"};
  std::filesystem::path out = "experiment_out";
  std::optional<std::filesystem::path> relevance_file;
  BoostParams params;
  double huber_delta = 1.0;
  bool fast = false;
  bool stratify_groups = false;

  // Schema keys plus data, models, runs, train_ratio, seed, metrics, out,
  // relevance, rounds, depth, eta, lambda, min_child_hessian, huber_delta,
  // fast, stratify. Relative paths resolve against base_dir.
  static ExperimentConfig FromConfig(const KeyValueConfig& config,
                                     const std::filesystem::path& base_dir);
  static ExperimentConfig Load(const std::filesystem::path& path);
  void Validate() const;
};

struct RankCell {
  double mean = 0.0;
  double sd = 0.0;
};

struct RankTable {
  std::vector<std::string> models;
  std::vector<std::string> metrics;
  // cells[model][metric]
  std::vector<std::vector<RankCell>> cells;

  // model,<metric>_mean,<metric>_sd,...
  std::string ToCsv() const;
};

// Ranks (1 = lowest score). Ties share the average rank; NaN scores mark a
// failed model and tie for last place.
std::vector<double> AverageRanks(std::span<const double> scores);

// scores[run][model][metric] -> mean and sample standard deviation of the
// per-run ranks.
RankTable AggregateRanks(
    const std::vector<std::string>& models,
    const std::vector<std::string>& metrics,
    const std::vector<std::vector<std::vector<double>>>& scores);

struct ExperimentResult {
  RankTable ranks;
  // scores[run][model][metric]; NaN for failures.
  std::vector<std::vector<std::vector<double>>> scores;
  std::vector<std::vector<std::string>> failures;  // [run] -> messages
};

// Loads config.data, then for each run r: split with seed + r, fit every
// model, score on the test part. Writes ranks.csv, raw_metrics.csv and
// run_<r>/ artifacts under config.out.
ExperimentResult RunExperiment(const ExperimentConfig& config);
// Same with an in-memory dataset (config.data is ignored).
ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const GroupedDataset& ds);

// Normalized SER curves of one model averaged over runs on the union of
// breakpoints; rows t,group,label,normalized_ser,runs.
struct AveragedCurve {
  std::vector<double> t;
  // values[group][k]; NaN where no run has the group non-empty at t[k].
  std::vector<std::vector<double>> values;
  std::vector<std::vector<int>> runs;
  std::vector<std::string> labels;

  std::string ToCsv() const;
};

AveragedCurve AverageNormalizedCurves(std::span<const SerCurveSet> per_run,
                                      std::vector<std::string> labels);

// Reads the run_<r>/ predictions written by RunExperiment, rebuilds each
// test split from the seed and writes curves/<model>.csv under config.out.
void ExportIdCurves(const ExperimentConfig& config);
void ExportIdCurves(const ExperimentConfig& config, const GroupedDataset& ds);

}  // namespace idfair

#endif  // IDFAIR_HARNESS_HPP_
