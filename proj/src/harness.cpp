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

#include "idfair/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "idfair/error.hpp"
#include "idfair/idboost.hpp"
#include "idfair/manifest.hpp"
#include "idfair/numeric.hpp"

namespace idfair {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ParseNumber(const std::string& key, const std::string& text) {
  double v = 0.0;
  if (!ParseDouble(text, v)) {
    Fail(ErrorKind::kInput, fmt::format("config key '{}': '{}' is not a number", key, text));
  }
  return v;
}

long long ParseInteger(const std::string& key, const std::string& text) {
  const double v = ParseNumber(key, text);
  if (v != std::floor(v) || std::abs(v) > 9e15) {
    Fail(ErrorKind::kInput, fmt::format("config key '{}': '{}' is not an integer", key, text));
  }
  return static_cast<long long>(v);
}

bool ParseBool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  Fail(ErrorKind::kInput, fmt::format("config key '{}': '{}' is not a boolean", key, text));
}

std::string JoinNames(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

Manifest ExperimentManifest(const ExperimentConfig& c, const std::string& what) {
  Manifest m;
  m.command = "experiment:" + what;
  std::vector<std::string> models;
  for (const auto& s : c.models) models.push_back(s.name);
  m.parameters = {
      {"data", c.data.string()},
      {"target", c.schema.target_column},
      {"protected", JoinNames(c.schema.protected_columns)},
      {"privileged", JoinNames(c.schema.privileged_values)},
      {"drop", JoinNames(c.schema.drop_columns)},
      {"models", JoinNames(models)},
      {"runs", std::to_string(c.runs)},
      {"train_ratio", FormatExact(c.train_ratio)},
      {"seed", std::to_string(c.seed)},
      {"metrics", JoinNames(c.metrics)},
      {"relevance", c.relevance_file ? c.relevance_file->string() : "boxplot"},
      {"rounds", std::to_string(c.params.n_rounds)},
      {"depth", std::to_string(c.params.max_depth)},
      {"eta", FormatExact(c.params.learning_rate)},
      {"lambda", FormatExact(c.params.l2_lambda)},
      {"min_child_hessian", FormatExact(c.params.min_child_hessian)},
      {"hess_floor", FormatExact(c.params.hess_floor)},
      {"huber_delta", FormatExact(c.huber_delta)},
      {"fast", c.fast ? "true" : "false"},
      {"stratify", c.stratify_groups ? "true" : "false"},
  };
  if (!c.data.empty()) m.inputs.push_back(c.data.string());
  return m;
}

RelevanceFunction ExperimentRelevance(const ExperimentConfig& config,
                                      const GroupedDataset& ds) {
  if (config.relevance_file) return RelevanceFunction::LoadCsv(*config.relevance_file);
  return RelevanceFunction::FromBoxplot(ds.targets());
}

std::vector<double> FitAndPredict(const ModelSpec& spec, const ExperimentConfig& config,
                                  const GroupedDataset& train, const GroupedDataset& test,
                                  const RelevanceFunction& phi, std::string& model_json) {
  if (spec.idboost) {
    IdBoostOptions options;
    options.params = config.params;
    options.w = spec.w;
    options.fast = config.fast;
    const IdBoostModel model = FitIdBoost(train, phi, options);
    model_json = model.ToJson();
    return model.Predict(test);
  }
  ObjectiveOptions options;
  options.relevance = phi;
  options.huber_delta = config.huber_delta;
  options.fast = config.fast;
  const TreeEnsemble model = Fit(train, spec.objective, options, config.params);
  model_json = model.ToJson();
  return model.Predict(test);
}

std::string PredictionsCsv(std::span<const double> preds) {
  std::string text = "prediction\n";
  for (double p : preds) text += FormatExact(p) + "\n";
  return text;
}

std::filesystem::path RunDir(const ExperimentConfig& config, int r) {
  return config.out / fmt::format("run_{}", r);
}

double SampleSd(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  CompensatedSum s;
  for (double x : v) s.Add((x - mean) * (x - mean));
  return std::sqrt(s.Value() / static_cast<double>(v.size() - 1));
}

}  // namespace

// ---------------------------------------------------------------------------

ModelSpec ModelSpec::Parse(const std::string& text) {
  ModelSpec spec;
  const std::string t = Trim(text);
  if (IsKnownObjective(t)) {
    spec.name = t;
    spec.objective = t;
    return spec;
  }
  const std::string prefix = "idboost_";
  std::string lower = t;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.rfind(prefix, 0) == 0) {
    double w = 0.0;
    if (!ParseDouble(t.substr(prefix.size()), w) || w < 0.0 || w > 1.0) {
      Fail(ErrorKind::kParameter, "bad IDBoost weight in model '" + t + "'");
    }
    spec.idboost = true;
    spec.w = w;
    spec.name = IdBoostName(w);
    return spec;
  }
  Fail(ErrorKind::kParameter,
       "unknown model '" + t + "' (expected mse, huber, sera, idloss or idboost_<w>)");
}

const std::vector<std::string>& KnownMetrics() {
  static const std::vector<std::string> kMetrics = {"mse", "mae", "sera",
                                                    "id",  "delta_bgl", "sp"};
  return kMetrics;
}

std::optional<double> MetricValue(const FairnessReport& report, const std::string& metric) {
  if (metric == "mse") return report.mse;
  if (metric == "mae") return report.mae;
  if (metric == "sera") return report.sera;
  if (metric == "id") return report.id;
  if (metric == "delta_bgl") return report.delta_bgl;
  if (metric == "sp") return report.sp;
  Fail(ErrorKind::kParameter, "unknown metric '" + metric + "'");
}

ExperimentConfig ExperimentConfig::FromConfig(const KeyValueConfig& config,
                                              const std::filesystem::path& base_dir) {
  static const std::set<std::string> kKeys = {
      "target", "protected", "privileged", "drop", "data", "models", "runs",
      "train_ratio", "seed", "metrics", "out", "relevance", "rounds", "depth", "eta",
      "lambda", "min_child_hessian", "hess_floor", "huber_delta", "fast", "stratify"};
  for (const auto& [key, value] : config.values()) {
    if (!kKeys.count(key)) Fail(ErrorKind::kInput, "unknown config key '" + key + "'");
  }
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  ExperimentConfig c;
  if (config.Has("target")) c.schema = DatasetSchema::FromConfig(config);
  if (auto v = config.Get("data")) c.data = resolve(*v);
  if (config.Has("models")) {
    c.models.clear();
    for (const auto& m : config.GetList("models")) c.models.push_back(ModelSpec::Parse(m));
  }
  if (auto v = config.Get("runs")) c.runs = static_cast<int>(ParseInteger("runs", *v));
  if (auto v = config.Get("train_ratio")) c.train_ratio = ParseNumber("train_ratio", *v);
  if (auto v = config.Get("seed")) {
    const long long s = ParseInteger("seed", *v);
    if (s < 0) Fail(ErrorKind::kInput, "seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (config.Has("metrics")) c.metrics = config.GetList("metrics");
  if (auto v = config.Get("out")) c.out = resolve(*v);
  if (auto v = config.Get("relevance")) c.relevance_file = resolve(*v);
  if (auto v = config.Get("rounds")) c.params.n_rounds = static_cast<int>(ParseInteger("rounds", *v));
  if (auto v = config.Get("depth")) c.params.max_depth = static_cast<int>(ParseInteger("depth", *v));
  if (auto v = config.Get("eta")) c.params.learning_rate = ParseNumber("eta", *v);
  if (auto v = config.Get("lambda")) c.params.l2_lambda = ParseNumber("lambda", *v);
  if (auto v = config.Get("min_child_hessian")) {
    c.params.min_child_hessian = ParseNumber("min_child_hessian", *v);
  }
  if (auto v = config.Get("hess_floor")) c.params.hess_floor = ParseNumber("hess_floor", *v);
  if (auto v = config.Get("huber_delta")) c.huber_delta = ParseNumber("huber_delta", *v);
  if (auto v = config.Get("fast")) c.fast = ParseBool("fast", *v);
  if (auto v = config.Get("stratify")) c.stratify_groups = ParseBool("stratify", *v);
  c.params.seed = c.seed;
  return c;
}

ExperimentConfig ExperimentConfig::Load(const std::filesystem::path& path) {
  return FromConfig(KeyValueConfig::Load(path), path.parent_path());
}

void ExperimentConfig::Validate() const {
  if (runs < 1) Fail(ErrorKind::kParameter, "runs must be >= 1");
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    Fail(ErrorKind::kParameter, "train_ratio must lie in (0, 1)");
  }
  if (models.empty()) Fail(ErrorKind::kParameter, "no models configured");
  std::set<std::string> names;
  for (const auto& m : models) {
    if (!names.insert(m.name).second) {
      Fail(ErrorKind::kParameter, "model '" + m.name + "' listed twice");
    }
  }
  if (metrics.empty()) Fail(ErrorKind::kParameter, "no metrics configured");
  for (const auto& m : metrics) {
    if (std::find(KnownMetrics().begin(), KnownMetrics().end(), m) == KnownMetrics().end()) {
      Fail(ErrorKind::kParameter, "unknown metric '" + m + "'");
    }
  }
  if (!(huber_delta > 0.0)) Fail(ErrorKind::kParameter, "huber_delta must be positive");
  params.Validate();
}

// ---------------------------------------------------------------------------
// Ranks

std::vector<double> AverageRanks(std::span<const double> scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // NaN sorts after every number and ties with other NaNs.
  auto key_less = [&](std::size_t a, std::size_t b) {
    const bool na = std::isnan(scores[a]);
    const bool nb = std::isnan(scores[b]);
    if (na || nb) return !na && nb;
    return scores[a] < scores[b];
  };
  std::stable_sort(order.begin(), order.end(), key_less);
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && !key_less(order[i], order[j]) && !key_less(order[j], order[i])) ++j;
    // Positions i..j-1 share the mean of ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

RankTable AggregateRanks(const std::vector<std::string>& models,
                         const std::vector<std::string>& metrics,
                         const std::vector<std::vector<std::vector<double>>>& scores) {
  RankTable table;
  table.models = models;
  table.metrics = metrics;
  const std::size_t runs = scores.size();
  std::vector<std::vector<std::vector<double>>> ranks(
      models.size(), std::vector<std::vector<double>>(metrics.size()));
  for (std::size_t r = 0; r < runs; ++r) {
    if (scores[r].size() != models.size()) {
      Fail(ErrorKind::kInternal, "score matrix does not match the model list");
    }
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      std::vector<double> column(models.size());
      for (std::size_t m = 0; m < models.size(); ++m) {
        if (scores[r][m].size() != metrics.size()) {
          Fail(ErrorKind::kInternal, "score matrix does not match the metric list");
        }
        column[m] = scores[r][m][k];
      }
      const auto rk = AverageRanks(column);
      for (std::size_t m = 0; m < models.size(); ++m) ranks[m][k].push_back(rk[m]);
    }
  }
  table.cells.assign(models.size(), std::vector<RankCell>(metrics.size()));
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      const auto& v = ranks[m][k];
      if (v.empty()) {
        table.cells[m][k] = {kNaN, kNaN};
        continue;
      }
      const double mean = AccurateSum(v) / static_cast<double>(v.size());
      table.cells[m][k] = {mean, SampleSd(v, mean)};
    }
  }
  return table;
}

std::string RankTable::ToCsv() const {
  std::vector<std::string> header = {"model"};
  for (const auto& m : metrics) {
    header.push_back(m + "_mean");
    header.push_back(m + "_sd");
  }
  std::string text = CsvLine(header);
  for (std::size_t m = 0; m < models.size(); ++m) {
    std::vector<std::string> row = {models[m]};
    for (const auto& cell : cells[m]) {
      row.push_back(FormatExact(cell.mean));
      row.push_back(FormatExact(cell.sd));
    }
    text += CsvLine(row);
  }
  return text;
}

// ---------------------------------------------------------------------------
// Runs

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  config.schema.Validate();
  if (config.data.empty()) Fail(ErrorKind::kParameter, "no data file configured");
  return RunExperiment(config, LoadCsv(config.data, config.schema));
}

ExperimentResult RunExperiment(const ExperimentConfig& config, const GroupedDataset& ds) {
  config.Validate();
  const RelevanceFunction phi = ExperimentRelevance(config, ds);
  {
    std::string text = "y,relevance\n";
    for (const auto& p : phi.control_points()) {
      text += FormatExact(p.y) + "," + FormatExact(p.relevance) + "\n";
    }
    WriteWithManifest(config.out / "relevance.csv", text,
                      ExperimentManifest(config, "relevance"));
  }

  std::vector<std::string> model_names;
  for (const auto& m : config.models) model_names.push_back(m.name);

  ExperimentResult result;
  std::string raw = "run,model,status," + JoinNames(KnownMetrics()) + ",error\n";
  for (int r = 0; r < config.runs; ++r) {
    const auto [train, test] =
        Split(ds, config.train_ratio, config.seed + static_cast<std::uint64_t>(r),
              config.stratify_groups);
    const auto dir = RunDir(config, r);
    const Manifest manifest = ExperimentManifest(config, fmt::format("run_{}", r));
    {
      std::string rows = "row_id\n";
      for (std::size_t id : test.row_ids()) rows += std::to_string(id) + "\n";
      WriteWithManifest(dir / "test_rows.csv", rows, manifest);
    }
    std::vector<std::vector<double>> run_scores;
    std::vector<std::string> run_failures;
    for (const auto& spec : config.models) {
      std::vector<double> values(config.metrics.size(), kNaN);
      std::vector<std::string> row = {std::to_string(r), spec.name};
      try {
        std::string model_json;
        const auto preds = FitAndPredict(spec, config, train, test, phi, model_json);
        const FairnessReport report = FullReport(test, preds, phi);
        WriteWithManifest(dir / (spec.name + ".predictions.csv"), PredictionsCsv(preds),
                          manifest);
        WriteWithManifest(dir / (spec.name + ".model.json"), model_json, manifest);
        WriteWithManifest(dir / (spec.name + ".report.json"), report.ToJson() + "\n",
                          manifest);
        for (std::size_t k = 0; k < config.metrics.size(); ++k) {
          values[k] = MetricValue(report, config.metrics[k]).value_or(kNaN);
        }
        row.emplace_back("ok");
        for (const auto& m : KnownMetrics()) {
          const auto v = MetricValue(report, m);
          row.push_back(v ? FormatExact(*v) : "");
        }
        row.emplace_back(report.errors.empty() ? "" : report.errors.front());
      } catch (const std::exception& e) {
        // A failed model takes last place in every metric of this run.
        run_failures.push_back(spec.name + ": " + e.what());
        WriteWithManifest(dir / (spec.name + ".failed.txt"), std::string(e.what()) + "\n",
                          manifest);
        row.emplace_back("failed");
        for (std::size_t k = 0; k < KnownMetrics().size(); ++k) row.emplace_back("");
        row.emplace_back(e.what());
      }
      raw += CsvLine(row);
      run_scores.push_back(std::move(values));
    }
    result.scores.push_back(std::move(run_scores));
    result.failures.push_back(std::move(run_failures));
  }
  result.ranks = AggregateRanks(model_names, config.metrics, result.scores);
  WriteWithManifest(config.out / "raw_metrics.csv", raw,
                    ExperimentManifest(config, "raw_metrics"));
  WriteWithManifest(config.out / "ranks.csv", result.ranks.ToCsv(),
                    ExperimentManifest(config, "ranks"));
  return result;
}

// ---------------------------------------------------------------------------
// Averaged curves

AveragedCurve AverageNormalizedCurves(std::span<const SerCurveSet> per_run,
                                      std::vector<std::string> labels) {
  if (per_run.empty()) Fail(ErrorKind::kMissingArtifacts, "no runs to average");
  const std::size_t groups = per_run.front().num_groups();
  if (labels.size() != groups) Fail(ErrorKind::kInternal, "one label per group expected");
  AveragedCurve out;
  out.labels = std::move(labels);
  for (const auto& c : per_run) {
    if (c.num_groups() != groups) {
      Fail(ErrorKind::kInternal, "runs disagree on the group catalog");
    }
    out.t.insert(out.t.end(), c.breakpoints().begin(), c.breakpoints().end());
  }
  std::sort(out.t.begin(), out.t.end());
  out.t.erase(std::unique(out.t.begin(), out.t.end()), out.t.end());
  out.values.assign(groups, std::vector<double>(out.t.size(), kNaN));
  out.runs.assign(groups, std::vector<int>(out.t.size(), 0));
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t k = 0; k < out.t.size(); ++k) {
      CompensatedSum s;
      int count = 0;
      for (const auto& c : per_run) {
        const double v = c.normalized_at(static_cast<GroupId>(g), out.t[k]);
        if (std::isnan(v)) continue;
        s.Add(v);
        ++count;
      }
      out.runs[g][k] = count;
      if (count) out.values[g][k] = s.Value() / count;
    }
  }
  return out;
}

std::string AveragedCurve::ToCsv() const {
  std::string text = "t,group,label,normalized_ser,runs\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (std::size_t g = 0; g < values.size(); ++g) {
      text += CsvLine({FormatExact(t[k]), std::to_string(g), labels[g],
                       std::isnan(values[g][k]) ? "" : FormatExact(values[g][k]),
                       std::to_string(runs[g][k])});
    }
  }
  return text;
}

void ExportIdCurves(const ExperimentConfig& config) {
  config.schema.Validate();
  if (config.data.empty()) Fail(ErrorKind::kParameter, "no data file configured");
  ExportIdCurves(config, LoadCsv(config.data, config.schema));
}

void ExportIdCurves(const ExperimentConfig& config, const GroupedDataset& ds) {
  config.Validate();
  const RelevanceFunction phi = ExperimentRelevance(config, ds);
  std::vector<std::string> labels;
  for (std::size_t g = 0; g < ds.num_groups(); ++g) {
    labels.push_back(ds.GroupLabel(static_cast<GroupId>(g)));
  }

  std::vector<std::string> missing;
  std::vector<std::vector<SerCurveSet>> curves(config.models.size());
  for (int r = 0; r < config.runs; ++r) {
    const auto dir = RunDir(config, r);
    const auto test =
        Split(ds, config.train_ratio, config.seed + static_cast<std::uint64_t>(r),
              config.stratify_groups)
            .second;
    std::shared_ptr<const CurveLayout> layout;
    for (std::size_t m = 0; m < config.models.size(); ++m) {
      const auto& name = config.models[m].name;
      const auto pred_path = dir / (name + ".predictions.csv");
      if (!std::filesystem::exists(pred_path)) {
        if (!std::filesystem::exists(dir / (name + ".failed.txt"))) {
          missing.push_back(fmt::format("run_{}/{}", r, name));
        }
        continue;
      }
      const CsvTable table = ReadCsv(pred_path);
      const auto col = table.Column("prediction");
      if (!col) Fail(ErrorKind::kInput, pred_path.string() + " has no prediction column");
      std::vector<double> preds;
      for (const auto& row : table.rows) {
        double v = 0.0;
        if (!ParseDouble(row[*col], v)) {
          Fail(ErrorKind::kInput, "unparseable prediction in " + pred_path.string());
        }
        preds.push_back(v);
      }
      if (preds.size() != test.size()) {
        Fail(ErrorKind::kInput,
             fmt::format("{}: {} predictions for a test split of {} rows",
                         pred_path.string(), preds.size(), test.size()));
      }
      if (!layout) layout = std::make_shared<const CurveLayout>(test, phi);
      curves[m].emplace_back(layout, test.targets(), preds);
    }
  }
  if (!missing.empty()) {
    Fail(ErrorKind::kMissingArtifacts, "missing run artifacts: " + JoinNames(missing));
  }
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    if (curves[m].empty()) continue;
    const AveragedCurve avg = AverageNormalizedCurves(curves[m], labels);
    WriteWithManifest(config.out / "curves" / (config.models[m].name + ".csv"), avg.ToCsv(),
                      ExperimentManifest(config, "curves"));
  }
}

}  // namespace idfair
