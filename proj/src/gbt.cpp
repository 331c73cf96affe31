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

#include "idfair/gbt.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "idfair/error.hpp"
#include "idfair/numeric.hpp"

namespace idfair {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormat = "idfair.tree_ensemble";
constexpr int kVersion = 1;

double Gain(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? g * g / denom : 0.0;
}

double LeafWeight(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? -g / denom : 0.0;
}

struct NodeStats {
  double grad = 0.0;
  double hess = 0.0;
};

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// Per-node accumulator used while scanning one feature in sorted order.
struct ScanState {
  CompensatedSum grad;
  CompensatedSum hess;
  bool seen = false;
  double last = 0.0;
};

RegressionTree GrowTree(const GroupedDataset& ds,
                        const std::vector<std::vector<std::size_t>>& sorted,
                        const GradHess& gh, const BoostParams& params) {
  const std::size_t n = ds.size();
  const std::size_t d = ds.num_features();
  const auto x = ds.features();
  std::vector<TreeNode> nodes(1);
  std::vector<int> position(n, 0);

  std::vector<int> active = {0};
  std::vector<NodeStats> stats(1);
  {
    CompensatedSum g;
    CompensatedSum h;
    for (std::size_t i = 0; i < n; ++i) {
      g.Add(gh.grad[i]);
      h.Add(gh.hess[i]);
    }
    stats[0] = {g.Value(), h.Value()};
  }

  for (int depth = 0; !active.empty(); ++depth) {
    std::vector<SplitCandidate> best(nodes.size());
    if (depth < params.max_depth) {
      std::vector<ScanState> scan(nodes.size());
      for (std::size_t f = 0; f < d; ++f) {
        for (int a : active) scan[static_cast<std::size_t>(a)] = ScanState{};
        for (std::size_t i : sorted[f]) {
          const int node = position[i];
          if (node < 0) continue;
          const auto u = static_cast<std::size_t>(node);
          ScanState& s = scan[u];
          const double v = x[i * d + f];
          if (s.seen && v > s.last) {
            const double gl = s.grad.Value();
            const double hl = s.hess.Value();
            const double gr = stats[u].grad - gl;
            const double hr = stats[u].hess - hl;
            if (hl >= params.min_child_hessian && hr >= params.min_child_hessian) {
              const double gain = Gain(gl, hl, params.l2_lambda) +
                                  Gain(gr, hr, params.l2_lambda) -
                                  Gain(stats[u].grad, stats[u].hess, params.l2_lambda);
              // Strict comparison keeps the lowest feature and threshold.
              if (gain > best[u].gain) {
                double thr = 0.5 * (s.last + v);
                if (!(thr < v)) thr = s.last;
                best[u] = {gain, static_cast<int>(f), thr};
              }
            }
          }
          s.grad.Add(gh.grad[i]);
          s.hess.Add(gh.hess[i]);
          s.seen = true;
          s.last = v;
        }
      }
    }

    std::vector<int> next;
    for (int a : active) {
      const auto u = static_cast<std::size_t>(a);
      if (best[u].feature < 0) {
        nodes[u].value = LeafWeight(stats[u].grad, stats[u].hess, params.l2_lambda);
        continue;
      }
      nodes[u].feature = best[u].feature;
      nodes[u].threshold = best[u].threshold;
      nodes[u].left = static_cast<int>(nodes.size());
      nodes[u].right = static_cast<int>(nodes.size() + 1);
      nodes.emplace_back();
      nodes.emplace_back();
      stats.resize(nodes.size());
      next.push_back(nodes[u].left);
      next.push_back(nodes[u].right);
    }
    if (next.empty()) break;

    std::vector<CompensatedSum> g(nodes.size());
    std::vector<CompensatedSum> h(nodes.size());
    for (std::size_t i = 0; i < n; ++i) {
      const int node = position[i];
      if (node < 0) continue;
      const TreeNode& t = nodes[static_cast<std::size_t>(node)];
      if (t.is_leaf()) {
        position[i] = -1;
        continue;
      }
      const double v = x[i * d + static_cast<std::size_t>(t.feature)];
      position[i] = v <= t.threshold ? t.left : t.right;
      const auto c = static_cast<std::size_t>(position[i]);
      g[c].Add(gh.grad[i]);
      h[c].Add(gh.hess[i]);
    }
    for (int c : next) {
      const auto u = static_cast<std::size_t>(c);
      stats[u] = {g[u].Value(), h[u].Value()};
    }
    active = std::move(next);
  }
  return RegressionTree(std::move(nodes));
}

Json ParamsToJson(const BoostParams& p) {
  return {{"n_rounds", p.n_rounds},
          {"learning_rate", p.learning_rate},
          {"max_depth", p.max_depth},
          {"min_child_hessian", p.min_child_hessian},
          {"l2_lambda", p.l2_lambda},
          {"hess_floor", p.hess_floor},
          {"seed", p.seed}};
}

BoostParams ParamsFromJson(const Json& j) {
  BoostParams p;
  p.n_rounds = j.at("n_rounds").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_child_hessian = j.at("min_child_hessian").get<double>();
  p.l2_lambda = j.at("l2_lambda").get<double>();
  p.hess_floor = j.at("hess_floor").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

}  // namespace

void BoostParams::Validate() const {
  if (n_rounds < 0) Fail(ErrorKind::kParameter, "n_rounds must be >= 0");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    Fail(ErrorKind::kParameter, "learning_rate must lie in (0, 1]");
  }
  if (max_depth < 0) Fail(ErrorKind::kParameter, "max_depth must be >= 0");
  if (!(min_child_hessian >= 0.0)) {
    Fail(ErrorKind::kParameter, "min_child_hessian must be >= 0");
  }
  if (!(l2_lambda >= 0.0)) Fail(ErrorKind::kParameter, "l2_lambda must be >= 0");
  if (!(hess_floor >= 0.0)) Fail(ErrorKind::kParameter, "hess_floor must be >= 0");
}

double RegressionTree::Predict(std::span<const double> row) const {
  if (nodes_.empty()) return 0.0;
  std::size_t u = 0;
  while (!nodes_[u].is_leaf()) {
    const TreeNode& t = nodes_[u];
    u = static_cast<std::size_t>(row[static_cast<std::size_t>(t.feature)] <= t.threshold
                                     ? t.left
                                     : t.right);
  }
  return nodes_[u].value;
}

int RegressionTree::Depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::size_t, int>> stack = {{0, 0}};
  int depth = 0;
  while (!stack.empty()) {
    const auto [u, d] = stack.back();
    stack.pop_back();
    depth = std::max(depth, d);
    if (!nodes_[u].is_leaf()) {
      stack.push_back({static_cast<std::size_t>(nodes_[u].left), d + 1});
      stack.push_back({static_cast<std::size_t>(nodes_[u].right), d + 1});
    }
  }
  return depth;
}

std::size_t RegressionTree::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TreeNode& t) { return t.is_leaf(); }));
}

// ---------------------------------------------------------------------------

TreeEnsemble::TreeEnsemble(double base_score, std::vector<RegressionTree> trees,
                           BoostParams params, std::string objective,
                           std::size_t num_features, std::vector<double> trace)
    : base_score_(base_score),
      trees_(std::move(trees)),
      params_(params),
      objective_(std::move(objective)),
      num_features_(num_features),
      trace_(std::move(trace)) {}

double TreeEnsemble::PredictRow(std::span<const double> row) const {
  // Same accumulation order as training, so a refit reproduces the training
  // predictions bit for bit.
  double pred = base_score_;
  for (const auto& t : trees_) pred += params_.learning_rate * t.Predict(row);
  return pred;
}

std::vector<double> TreeEnsemble::Predict(std::span<const double> features,
                                          std::size_t num_features) const {
  if (num_features != num_features_) {
    Fail(ErrorKind::kInput, fmt::format("model expects {} features, got {}",
                                        num_features_, num_features));
  }
  if (num_features == 0) {
    Fail(ErrorKind::kInput, "cannot infer row count without features");
  }
  if (features.size() % num_features != 0) {
    Fail(ErrorKind::kInput, "feature matrix is not a whole number of rows");
  }
  const std::size_t n = features.size() / num_features;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = PredictRow(features.subspan(i * num_features, num_features));
  }
  return out;
}

std::vector<double> TreeEnsemble::Predict(const GroupedDataset& ds) const {
  if (ds.num_features() != num_features_) {
    Fail(ErrorKind::kInput, fmt::format("model expects {} features, got {}",
                                        num_features_, ds.num_features()));
  }
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = PredictRow(ds.row(i));
  return out;
}

TreeEnsemble TreeEnsemble::Truncated(std::size_t k) const {
  k = std::min(k, trees_.size());
  std::vector<RegressionTree> trees(trees_.begin(), trees_.begin() + static_cast<long>(k));
  std::vector<double> trace(trace_.begin(),
                            trace_.begin() + static_cast<long>(std::min(trace_.size(), k + 1)));
  return TreeEnsemble(base_score_, std::move(trees), params_, objective_, num_features_,
                      std::move(trace));
}

std::string TreeEnsemble::ToJson() const {
  Json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["objective"] = objective_;
  j["num_features"] = num_features_;
  j["base_score"] = base_score_;
  j["params"] = ParamsToJson(params_);
  j["trace"] = trace_;
  j["trees"] = Json::array();
  for (const auto& t : trees_) {
    Json nodes = Json::array();
    for (const auto& n : t.nodes()) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right}});
      }
    }
    j["trees"].push_back(std::move(nodes));
  }
  return j.dump();
}

TreeEnsemble TreeEnsemble::FromJson(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) {
      Fail(ErrorKind::kInput, "not a tree ensemble model file");
    }
    if (j.at("version").get<int>() != kVersion) {
      Fail(ErrorKind::kInput, fmt::format("unsupported model version {}",
                                          j.at("version").get<int>()));
    }
    std::vector<RegressionTree> trees;
    for (const auto& jt : j.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& jn : jt) {
        TreeNode n;
        if (jn.contains("leaf")) {
          n.value = jn.at("leaf").get<double>();
        } else {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
        }
        nodes.push_back(n);
      }
      const int count = static_cast<int>(nodes.size());
      for (const auto& n : nodes) {
        if (!n.is_leaf() && (n.left <= 0 || n.left >= count || n.right <= 0 ||
                             n.right >= count)) {
          Fail(ErrorKind::kInput, "tree node child index out of range");
        }
      }
      trees.emplace_back(std::move(nodes));
    }
    const auto num_features = j.at("num_features").get<std::size_t>();
    for (const auto& t : trees) {
      for (const auto& n : t.nodes()) {
        if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= num_features) {
          Fail(ErrorKind::kInput, "tree split feature out of range");
        }
      }
    }
    return TreeEnsemble(j.at("base_score").get<double>(), std::move(trees),
                        ParamsFromJson(j.at("params")),
                        j.at("objective").get<std::string>(), num_features,
                        j.at("trace").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kInput, std::string("malformed model JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

TreeEnsemble Fit(const GroupedDataset& ds, Objective& objective,
                 const BoostParams& params, const RoundObserver& observer) {
  params.Validate();
  const std::size_t n = ds.size();
  if (n < 2) Fail(ErrorKind::kEmptyData, "boosting needs at least 2 rows");
  const std::size_t d = ds.num_features();

  std::vector<std::vector<std::size_t>> sorted(d);
  const auto x = ds.features();
  for (std::size_t f = 0; f < d; ++f) {
    sorted[f].resize(n);
    std::iota(sorted[f].begin(), sorted[f].end(), std::size_t{0});
    std::stable_sort(sorted[f].begin(), sorted[f].end(), [&](std::size_t a, std::size_t b) {
      return x[a * d + f] < x[b * d + f];
    });
  }

  const double base = AccurateSum(ds.targets()) / static_cast<double>(n);
  std::vector<double> preds(n, base);
  std::vector<RegressionTree> trees;
  std::vector<double> trace = {objective.Value(preds)};

  for (int round = 0; round < params.n_rounds; ++round) {
    GradHess gh = objective.Compute(preds);
    if (gh.grad.size() != n || gh.hess.size() != n) {
      Fail(ErrorKind::kInternal, "objective returned vectors of the wrong length");
    }
    bool any_curvature = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(gh.grad[i]) || !std::isfinite(gh.hess[i])) {
        Fail(ErrorKind::kDegenerateObjective,
             fmt::format("non-finite gradient or Hessian at row {}", i));
      }
      gh.hess[i] = std::max(gh.hess[i], params.hess_floor);
      any_curvature = any_curvature || gh.hess[i] > 0.0;
    }
    if (!any_curvature) {
      Fail(ErrorKind::kDegenerateObjective,
           fmt::format("all Hessians are zero in round {}", round + 1));
    }
    RegressionTree tree = GrowTree(ds, sorted, gh, params);
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] += params.learning_rate * tree.Predict(ds.row(i));
    }
    trees.push_back(std::move(tree));
    trace.push_back(objective.Value(preds));
    if (observer) observer(round + 1, preds);
  }
  return TreeEnsemble(base, std::move(trees), params, objective.name(), d,
                      std::move(trace));
}

TreeEnsemble Fit(const GroupedDataset& ds, const std::string& objective,
                 const ObjectiveOptions& options, const BoostParams& params,
                 const RoundObserver& observer) {
  params.Validate();
  ObjectiveOptions opts = options;
  opts.hess_floor = params.hess_floor;
  auto obj = MakeObjective(objective, ds, opts);
  return Fit(ds, *obj, params, observer);
}

}  // namespace idfair
