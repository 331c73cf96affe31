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

// idfair command-line tool: train, predict, audit, experiment, curves, synth
// and bench-approx. Exit codes: 0 success, 1 operational failure, 2 usage.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "idfair/approx_bench.hpp"
#include "idfair/dataset.hpp"
#include "idfair/error.hpp"
#include "idfair/harness.hpp"
#include "idfair/idboost.hpp"
#include "idfair/manifest.hpp"
#include "idfair/metrics.hpp"
#include "idfair/numeric.hpp"

namespace {

using namespace idfair;
namespace fs = std::filesystem;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Effective value of every option of a subcommand, defaults included.
Manifest ManifestFor(const CLI::App& cmd) {
  Manifest m;
  m.command = cmd.get_name();
  for (const CLI::Option* opt : cmd.get_options()) {
    std::string name = opt->get_name(false, false);
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    if (name.empty() || name == "help") continue;
    std::string value;
    if (opt->get_type_size_max() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
    } else {
      value = opt->get_default_str();
    }
    m.parameters[name] = value;
  }
  return m;
}

void AddInput(Manifest& m, const fs::path& p) {
  if (!p.empty()) m.inputs.push_back(p.string());
}

DatasetSchema SchemaFromFile(const fs::path& config) {
  if (config.empty()) Fail(ErrorKind::kParameter, "--config with the dataset schema is required");
  return DatasetSchema::Load(config);
}

RelevanceFunction ResolveRelevance(const std::string& relevance_file,
                                   const GroupedDataset& ds) {
  if (!relevance_file.empty()) return RelevanceFunction::LoadCsv(relevance_file);
  return RelevanceFunction::FromBoxplot(ds.targets());
}

std::vector<double> ReadPredictions(const fs::path& path) {
  const CsvTable table = ReadCsv(path);
  auto col = table.Column("prediction");
  if (!col) {
    if (table.header.size() != 1) {
      Fail(ErrorKind::kSchema, path.string() + " needs a 'prediction' column");
    }
    col = 0;
  }
  std::vector<double> preds;
  preds.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    double v = 0.0;
    if (!ParseDouble(table.rows[r][*col], v)) {
      Fail(ErrorKind::kInput, fmt::format("{}: unparseable prediction on line {}",
                                          path.string(), r + 2));
    }
    preds.push_back(v);
  }
  return preds;
}

std::string PredictionsCsv(std::span<const double> preds) {
  std::string text = "prediction\n";
  for (double p : preds) text += FormatExact(p) + "\n";
  return text;
}

void CheckLength(std::size_t preds, std::size_t rows) {
  if (preds != rows) {
    Fail(ErrorKind::kInput,
         fmt::format("length mismatch: {} predictions for {} data rows", preds, rows));
  }
}

// A model file holds either a single ensemble or an IDBoost pair.
std::vector<double> PredictWithModelFile(const fs::path& path, const GroupedDataset& ds) {
  const std::string text = ReadTextFile(path);
  std::string format;
  try {
    format = nlohmann::json::parse(text).at("format").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kInput, path.string() + " is not a model file: " + e.what());
  }
  if (format == "idfair.idboost") return IdBoostModel::FromJson(text).Predict(ds);
  return TreeEnsemble::FromJson(text).Predict(ds);
}

// ---------------------------------------------------------------------------

struct BoostFlags {
  BoostParams params;
  double huber_delta = 1.0;

  void Register(CLI::App* cmd) {
    cmd->add_option("--rounds", params.n_rounds, "Boosting rounds");
    cmd->add_option("--depth", params.max_depth, "Maximum tree depth");
    cmd->add_option("--eta", params.learning_rate, "Learning rate");
    cmd->add_option("--lambda", params.l2_lambda, "L2 penalty on leaf weights");
    cmd->add_option("--min-child-hessian", params.min_child_hessian,
                    "Minimum Hessian sum per child");
    cmd->add_option("--hess-floor", params.hess_floor, "Lower bound on Hessians");
    cmd->add_option("--huber-delta", huber_delta, "Huber threshold");
  }
};

struct Common {
  fs::path config;
  fs::path out;
  std::string relevance_file;
  std::uint64_t seed = 0;
  bool fast = false;
};

void AddCommon(CLI::App* cmd, Common& c, bool with_fast) {
  cmd->add_option("--config", c.config, "Schema or experiment config file");
  cmd->add_option("--out", c.out, "Output path");
  cmd->add_option("--relevance-file", c.relevance_file,
                  "Relevance control points (y,relevance[,slope])");
  cmd->add_option("--seed", c.seed, "Random seed");
  if (with_fast) cmd->add_flag("--fast", c.fast, "Pick alpha_min from simplified curves");
}

int RunTrain(const CLI::App& cmd, const Common& c, const fs::path& data,
             const std::string& objective, const std::string& model, double w,
             BoostFlags flags) {
  const GroupedDataset ds = LoadCsv(data, SchemaFromFile(c.config));
  const RelevanceFunction phi = ResolveRelevance(c.relevance_file, ds);
  flags.params.seed = c.seed;
  std::string json;
  std::string label;
  std::vector<double> trace;
  if (model == "idboost") {
    IdBoostOptions options;
    options.params = flags.params;
    options.w = w;
    options.fast = c.fast;
    const IdBoostModel m = FitIdBoost(ds, phi, options);
    json = m.ToJson();
    label = m.Name();
    trace = m.id_ensemble().trace();
  } else {
    ObjectiveOptions options;
    options.relevance = phi;
    options.huber_delta = flags.huber_delta;
    options.fast = c.fast;
    const TreeEnsemble m = Fit(ds, objective, options, flags.params);
    json = m.ToJson();
    label = objective;
    trace = m.trace();
  }
  const fs::path out = c.out.empty() ? fs::path("model.json") : c.out;
  Manifest manifest = ManifestFor(cmd);
  AddInput(manifest, data);
  AddInput(manifest, c.config);
  AddInput(manifest, c.relevance_file);
  WriteWithManifest(out, json, manifest);
  std::cerr << fmt::format("trained {} on {} rows; training loss {} -> {}; wrote {}\n",
                           label, ds.size(), FormatRounded(trace.front(), 6),
                           FormatRounded(trace.back(), 6), out.string());
  return 0;
}

int RunPredict(const CLI::App& cmd, const Common& c, const fs::path& model,
               const fs::path& data) {
  const GroupedDataset ds = LoadCsv(data, SchemaFromFile(c.config));
  const std::vector<double> preds = PredictWithModelFile(model, ds);
  const std::string text = PredictionsCsv(preds);
  if (c.out.empty()) {
    std::cout << text;
    return 0;
  }
  Manifest manifest = ManifestFor(cmd);
  AddInput(manifest, model);
  AddInput(manifest, data);
  WriteWithManifest(c.out, text, manifest);
  return 0;
}

int RunAudit(const CLI::App& cmd, const Common& c, const fs::path& preds_path,
             const fs::path& data, const std::string& format) {
  const GroupedDataset ds = LoadCsv(data, SchemaFromFile(c.config));
  const std::vector<double> preds = ReadPredictions(preds_path);
  CheckLength(preds.size(), ds.size());
  const RelevanceFunction phi = ResolveRelevance(c.relevance_file, ds);
  const FairnessReport report = FullReport(ds, preds, phi);
  std::cout << (format == "json" ? report.ToJson() + "\n" : report.ToText());
  if (!c.out.empty()) {
    Manifest manifest = ManifestFor(cmd);
    AddInput(manifest, preds_path);
    AddInput(manifest, data);
    AddInput(manifest, c.relevance_file);
    WriteWithManifest(c.out, report.ToJson() + "\n", manifest);
  }
  return 0;
}

ExperimentConfig LoadExperiment(const Common& c, const CLI::App& cmd) {
  if (c.config.empty()) Fail(ErrorKind::kParameter, "--config is required");
  ExperimentConfig config = ExperimentConfig::Load(c.config);
  if (!c.out.empty()) config.out = c.out;
  if (cmd.count("--seed")) {
    config.seed = c.seed;
    config.params.seed = c.seed;
  }
  if (!c.relevance_file.empty()) config.relevance_file = fs::path(c.relevance_file);
  if (c.fast) config.fast = true;
  return config;
}

int RunExperimentCmd(const CLI::App& cmd, const Common& c, bool curves) {
  const ExperimentConfig config = LoadExperiment(c, cmd);
  const ExperimentResult result = RunExperiment(config);
  for (std::size_t r = 0; r < result.failures.size(); ++r) {
    for (const auto& f : result.failures[r]) std::cerr << fmt::format("run {}: {}\n", r, f);
  }
  if (curves) ExportIdCurves(config);
  std::cout << result.ranks.ToCsv();
  return 0;
}

int RunCurves(const CLI::App& cmd, const Common& c, const fs::path& preds_path,
              const fs::path& data) {
  if (preds_path.empty()) {
    const ExperimentConfig config = LoadExperiment(c, cmd);
    ExportIdCurves(config);
    std::cerr << "wrote " << (config.out / "curves").string() << "\n";
    return 0;
  }
  const GroupedDataset ds = LoadCsv(data, SchemaFromFile(c.config));
  const std::vector<double> preds = ReadPredictions(preds_path);
  CheckLength(preds.size(), ds.size());
  const RelevanceFunction phi = ResolveRelevance(c.relevance_file, ds);
  const SerCurveSet curves = SerCurveSet::Build(ds, preds, phi);
  std::string text = curves.ExportCsvText();
  if (c.out.empty()) {
    std::cout << text;
    return 0;
  }
  Manifest manifest = ManifestFor(cmd);
  AddInput(manifest, preds_path);
  AddInput(manifest, data);
  WriteWithManifest(c.out, text, manifest);
  std::string labels = "group,label,count\n";
  for (std::size_t g = 0; g < ds.num_groups(); ++g) {
    labels += CsvLine({std::to_string(g), ds.GroupLabel(static_cast<GroupId>(g)),
                       std::to_string(ds.group_catalog()[g].count)});
  }
  fs::path groups_path = c.out;
  groups_path.replace_extension(".groups.csv");
  WriteWithManifest(groups_path, labels, manifest);
  return 0;
}

std::string SchemaText(const GroupedDataset& ds) {
  const DatasetSchema s = SavedSchema(ds);
  std::string text = "target = " + s.target_column + "\nprotected = ";
  for (std::size_t i = 0; i < s.protected_columns.size(); ++i) {
    text += (i ? "," : "") + s.protected_columns[i];
  }
  text += "\nprivileged = ";
  for (std::size_t i = 0; i < s.privileged_values.size(); ++i) {
    text += (i ? "," : "") + s.privileged_values[i];
  }
  return text + "\n";
}

int RunSynth(const CLI::App& cmd, const Common& c, const std::string& kind,
             std::size_t n, double divergence, std::size_t attributes) {
  const fs::path dir = c.out.empty() ? fs::path("synth") : c.out;
  const Manifest manifest = ManifestFor(cmd);
  if (kind == "imbalanced") {
    const ImbalancedScenario s = SynthImbalancedScenario(n, divergence, c.seed);
    SaveCsv(s.data, dir / "data.csv");
    const std::string data = ReadTextFile(dir / "data.csv");
    WriteWithManifest(dir / "data.csv", data, manifest);
    WriteWithManifest(dir / "predictions.csv", PredictionsCsv(s.predictions), manifest);
    std::string rel = "y,relevance\n";
    for (const auto& p : s.relevance.control_points()) {
      rel += FormatExact(p.y) + "," + FormatExact(p.relevance) + "\n";
    }
    WriteWithManifest(dir / "relevance.csv", rel, manifest);
    WriteWithManifest(dir / "schema.cfg", SchemaText(s.data), manifest);
  } else {
    const GroupedDataset ds = SynthBiased(n, attributes, c.seed);
    SaveCsv(ds, dir / "data.csv");
    const std::string data = ReadTextFile(dir / "data.csv");
    WriteWithManifest(dir / "data.csv", data, manifest);
    WriteWithManifest(dir / "schema.cfg", SchemaText(ds), manifest);
  }
  std::cerr << "wrote " << dir.string() << "\n";
  return 0;
}

int RunBench(const CLI::App& cmd, const Common& c, const fs::path& data,
             std::size_t synthetic_n, std::size_t attributes, BoostFlags flags,
             ApproxParams approx) {
  const GroupedDataset ds = data.empty() ? SynthBiased(synthetic_n, attributes, c.seed)
                                         : LoadCsv(data, SchemaFromFile(c.config));
  const RelevanceFunction phi = ResolveRelevance(c.relevance_file, ds);
  flags.params.seed = c.seed;
  const BenchReport report = BenchApprox(ds, phi, flags.params, flags.params.n_rounds, approx);
  const std::string text = report.ToCsv();
  std::cout << text;
  if (!c.out.empty()) {
    Manifest manifest = ManifestFor(cmd);
    AddInput(manifest, data);
    WriteWithManifest(c.out, text, manifest);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intersectional fairness auditing and fairness-aware boosting for "
               "imbalanced regression"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(idfair::kVersion));

  // train
  Common train_c;
  BoostFlags train_b;
  fs::path train_data;
  std::string objective = "mse";
  std::string model_kind = "single";
  double w = 0.5;
  auto* train = app.add_subcommand("train", "Fit a boosted ensemble or an IDBoost pair");
  AddCommon(train, train_c, true);
  train->add_option("--data", train_data, "Training CSV")->required();
  train->add_option("--objective", objective, "mse | huber | sera | idloss")
      ->check(CLI::IsMember({"mse", "huber", "sera", "idloss"}));
  train->add_option("--model", model_kind, "single | idboost")
      ->check(CLI::IsMember({"single", "idboost"}));
  train->add_option("--w", w, "IDBoost fairness weight in [0, 1]")->check(CLI::Range(0.0, 1.0));
  train_b.Register(train);

  // predict
  Common pred_c;
  fs::path pred_model;
  fs::path pred_data;
  auto* predict = app.add_subcommand("predict", "Predict with a saved model");
  AddCommon(predict, pred_c, false);
  predict->add_option("--model", pred_model, "Model JSON")->required();
  predict->add_option("--data", pred_data, "Feature CSV")->required();

  // audit
  Common audit_c;
  fs::path audit_preds;
  fs::path audit_data;
  std::string audit_format = "text";
  auto* audit = app.add_subcommand("audit", "Fairness report for a prediction file");
  AddCommon(audit, audit_c, false);
  audit->add_option("--predictions", audit_preds, "CSV with a prediction column")->required();
  audit->add_option("--data,--truth", audit_data, "CSV with targets and attributes")
      ->required();
  audit->add_option("--format", audit_format, "text | json")
      ->check(CLI::IsMember({"text", "json"}));

  // experiment
  Common exp_c;
  bool exp_curves = false;
  auto* experiment = app.add_subcommand("experiment", "Repeated-split model comparison");
  AddCommon(experiment, exp_c, true);
  experiment->add_flag("--curves", exp_curves, "Also export averaged curves");

  // curves
  Common curves_c;
  fs::path curves_preds;
  fs::path curves_data;
  auto* curves = app.add_subcommand(
      "curves", "Export SER curves (one prediction file, or an experiment's runs)");
  AddCommon(curves, curves_c, false);
  curves->add_option("--predictions", curves_preds, "CSV with a prediction column");
  curves->add_option("--data,--truth", curves_data, "CSV with targets and attributes");

  // synth
  Common synth_c;
  std::string synth_kind = "imbalanced";
  std::size_t synth_n = 500;
  double divergence = 1.0;
  std::size_t synth_attrs = 2;
  auto* synth = app.add_subcommand("synth", "Generate synthetic data");
  AddCommon(synth, synth_c, false);
  synth->add_option("--kind", synth_kind, "imbalanced | biased")
      ->check(CLI::IsMember({"imbalanced", "biased"}));
  synth->add_option("--n", synth_n, "Samples (per group for imbalanced)");
  synth->add_option("--divergence", divergence, "Error skew of the imbalanced scenario");
  synth->add_option("--attributes", synth_attrs, "Protected attributes (biased: 1 or 2)");

  // bench-approx
  Common bench_c;
  BoostFlags bench_b;
  fs::path bench_data;
  std::size_t bench_n = 2000;
  std::size_t bench_attrs = 1;
  ApproxParams approx;
  auto* bench = app.add_subcommand("bench-approx", "Exact vs simplified-curve IDBoost_0.5");
  AddCommon(bench, bench_c, false);
  bench->add_option("--data", bench_data, "CSV (default: biased synthetic data)");
  bench->add_option("--n", bench_n, "Synthetic sample count");
  bench->add_option("--attributes", bench_attrs, "Synthetic protected attributes");
  bench->add_option("--sigma", approx.sigma, "Gaussian bandwidth");
  bench->add_option("--grid-step", approx.grid_step, "Resampling step");
  bench->add_option("--min-points", approx.min_points, "Minimum retained points");
  bench_b.Register(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train) {
      return RunTrain(*train, train_c, train_data, objective, model_kind, w, train_b);
    }
    if (*predict) return RunPredict(*predict, pred_c, pred_model, pred_data);
    if (*audit) return RunAudit(*audit, audit_c, audit_preds, audit_data, audit_format);
    if (*experiment) return RunExperimentCmd(*experiment, exp_c, exp_curves);
    if (*curves) return RunCurves(*curves, curves_c, curves_preds, curves_data);
    if (*synth) return RunSynth(*synth, synth_c, synth_kind, synth_n, divergence, synth_attrs);
    if (*bench) {
      return RunBench(*bench, bench_c, bench_data, bench_n, bench_attrs, bench_b, approx);
    }
  } catch (const idfair::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
