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

#include "idfair/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "idfair/error.hpp"
#include "idfair/numeric.hpp"

namespace idfair {
namespace {

using Json = nlohmann::ordered_json;

void CheckLengths(std::size_t targets, std::size_t preds) {
  if (targets != preds) {
    Fail(ErrorKind::kInput,
         fmt::format("prediction length {} does not match {} targets", preds,
                     targets));
  }
}

struct MaeSplit {
  CompensatedSum priv;
  CompensatedSum unpriv;
  std::size_t n_priv = 0;
  std::size_t n_unpriv = 0;
};

template <typename Keep>
MaeSplit SplitAbsErrors(const GroupedDataset& ds, std::span<const double> preds,
                        std::size_t attribute, Keep keep) {
  MaeSplit s;
  const auto y = ds.targets();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!keep(i)) continue;
    const double e = std::abs(preds[i] - y[i]);
    if (ds.privileged(i, attribute)) {
      s.priv.Add(e);
      ++s.n_priv;
    } else {
      s.unpriv.Add(e);
      ++s.n_unpriv;
    }
  }
  return s;
}

void CheckAttribute(const GroupedDataset& ds, std::size_t attribute) {
  if (attribute >= ds.num_attributes()) {
    Fail(ErrorKind::kParameter, fmt::format("attribute index {} out of range", attribute));
  }
}

Json Optional(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> ReadOptional(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string CsvOptional(const std::optional<double>& v) {
  return v ? FormatExact(*v) : "";
}

std::string TextOptional(const std::optional<double>& v, int decimals = 4) {
  return v ? FormatRounded(*v, decimals) : "n/a";
}

}  // namespace

double MeanSquaredError(std::span<const double> targets,
                        std::span<const double> preds) {
  CheckLengths(targets.size(), preds.size());
  if (targets.empty()) Fail(ErrorKind::kEmptyData, "MSE of an empty sample");
  CompensatedSum s;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = preds[i] - targets[i];
    s.Add(r * r);
  }
  return s.Value() / static_cast<double>(targets.size());
}

double MeanAbsoluteError(std::span<const double> targets,
                         std::span<const double> preds) {
  CheckLengths(targets.size(), preds.size());
  if (targets.empty()) Fail(ErrorKind::kEmptyData, "MAE of an empty sample");
  CompensatedSum s;
  for (std::size_t i = 0; i < targets.size(); ++i) s.Add(std::abs(preds[i] - targets[i]));
  return s.Value() / static_cast<double>(targets.size());
}

double IntersectionalDivergence(const SerCurveSet& curves) {
  const CurveLayout& layout = curves.layout();
  std::size_t nonempty = 0;
  for (std::size_t g = 0; g < layout.num_groups(); ++g) {
    nonempty += layout.total_count(static_cast<GroupId>(g)) > 0;
  }
  if (nonempty < 2) {
    Fail(ErrorKind::kUndefinedMeasure,
         "intersectional divergence needs at least two non-empty groups");
  }
  std::vector<double> gap(curves.num_intervals(), 0.0);
  for (std::size_t k = 0; k < gap.size(); ++k) {
    double lo = INFINITY;
    double hi = -INFINITY;
    int candidates = 0;
    for (std::size_t g = 0; g < layout.num_groups(); ++g) {
      const auto gid = static_cast<GroupId>(g);
      if (layout.interval_count(gid, k) == 0) continue;
      const double v = curves.interval_normalized(gid, k);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++candidates;
    }
    if (candidates >= 2) gap[k] = hi - lo;
  }
  return IntegrateStep(gap, curves.breakpoints());
}

double DeltaBgl(const GroupedDataset& ds, std::span<const double> preds,
                std::size_t attribute) {
  CheckLengths(ds.size(), preds.size());
  CheckAttribute(ds, attribute);
  const MaeSplit s = SplitAbsErrors(ds, preds, attribute, [](std::size_t) { return true; });
  if (s.n_priv == 0 || s.n_unpriv == 0) {
    Fail(ErrorKind::kUndefinedMeasure,
         "attribute '" + ds.attribute_names()[attribute] + "' has only one side");
  }
  return std::abs(s.priv.Value() / static_cast<double>(s.n_priv) -
                  s.unpriv.Value() / static_cast<double>(s.n_unpriv));
}

double KolmogorovSmirnov(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    Fail(ErrorKind::kUndefinedMeasure, "KS statistic of an empty sample");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto na = static_cast<double>(sa.size());
  const auto nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  // Both empirical CDFs only jump at sample points; evaluate after each
  // distinct pooled value.
  while (i < sa.size() || j < sb.size()) {
    double x;
    if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      x = sa[i];
    } else {
      x = sb[j];
    }
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na -
                                   static_cast<double>(j) / nb));
  }
  return best;
}

double StatisticalParity(const GroupedDataset& ds, std::span<const double> preds,
                         std::size_t attribute) {
  CheckLengths(ds.size(), preds.size());
  CheckAttribute(ds, attribute);
  std::vector<double> priv;
  std::vector<double> unpriv;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (ds.privileged(i, attribute) ? priv : unpriv).push_back(preds[i]);
  }
  if (priv.empty() || unpriv.empty()) {
    Fail(ErrorKind::kUndefinedMeasure,
         "attribute '" + ds.attribute_names()[attribute] + "' has only one side");
  }
  return KolmogorovSmirnov(priv, unpriv);
}

double MaeDeltaPct(double mae_priv, double mae_unpriv) {
  if (!(mae_unpriv > 0.0)) {
    Fail(ErrorKind::kUndefinedMeasure, "unprivileged MAE is zero");
  }
  return (mae_priv - mae_unpriv) / mae_unpriv * 100.0;
}

std::string DeltaTrendName(DeltaTrend trend) {
  switch (trend) {
    case DeltaTrend::kReference: return "reference";
    case DeltaTrend::kIncrease: return "increase";
    case DeltaTrend::kDecrease: return "decrease";
    case DeltaTrend::kUnchanged: return "unchanged";
    case DeltaTrend::kUndefined: return "undefined";
  }
  return "undefined";
}

namespace {

DeltaTrend TrendFromName(const std::string& name) {
  for (auto t : {DeltaTrend::kReference, DeltaTrend::kIncrease, DeltaTrend::kDecrease,
                 DeltaTrend::kUnchanged, DeltaTrend::kUndefined}) {
    if (DeltaTrendName(t) == name) return t;
  }
  Fail(ErrorKind::kInput, "unknown trend '" + name + "'");
}

MaeDeltaRow MakeRow(std::string label, const MaeSplit& s) {
  MaeDeltaRow row;
  row.label = std::move(label);
  row.n_priv = s.n_priv;
  row.n_unpriv = s.n_unpriv;
  if (s.n_priv) row.mae_priv = s.priv.Value() / static_cast<double>(s.n_priv);
  if (s.n_unpriv) row.mae_unpriv = s.unpriv.Value() / static_cast<double>(s.n_unpriv);
  if (row.mae_priv && row.mae_unpriv && *row.mae_unpriv > 0.0) {
    row.delta_pct = MaeDeltaPct(*row.mae_priv, *row.mae_unpriv);
  }
  return row;
}

MaeDeltaTable AllOnlyTable(const GroupedDataset& ds, std::span<const double> preds,
                           std::size_t attribute) {
  MaeDeltaTable table;
  table.delta_attribute = ds.attribute_names()[attribute];
  auto row = MakeRow("All", SplitAbsErrors(ds, preds, attribute,
                                           [](std::size_t) { return true; }));
  row.trend = row.delta_pct ? DeltaTrend::kReference : DeltaTrend::kUndefined;
  table.rows.push_back(std::move(row));
  return table;
}

}  // namespace

MaeDeltaTable GroupMaeDeltaPct(const GroupedDataset& ds,
                               std::span<const double> preds,
                               std::size_t delta_attribute,
                               std::size_t condition_attribute) {
  CheckLengths(ds.size(), preds.size());
  CheckAttribute(ds, delta_attribute);
  CheckAttribute(ds, condition_attribute);
  if (delta_attribute == condition_attribute) {
    Fail(ErrorKind::kParameter, "delta and condition attributes must differ");
  }
  MaeDeltaTable table = AllOnlyTable(ds, preds, delta_attribute);
  const std::string& cond = ds.attribute_names()[condition_attribute];
  table.condition_attribute = cond;
  const std::optional<double> reference = table.rows.front().delta_pct;
  for (bool side : {true, false}) {
    auto row = MakeRow(cond + (side ? "=priv" : "=unpriv"),
                       SplitAbsErrors(ds, preds, delta_attribute, [&](std::size_t i) {
                         return ds.privileged(i, condition_attribute) == side;
                       }));
    if (row.delta_pct && reference) {
      const double here = std::abs(*row.delta_pct);
      const double all = std::abs(*reference);
      row.trend = here > all   ? DeltaTrend::kIncrease
                  : here < all ? DeltaTrend::kDecrease
                               : DeltaTrend::kUnchanged;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// FairnessReport

std::string FairnessReport::ToJson(int indent) const {
  Json j;
  j["n"] = n;
  j["id"] = Optional(id);
  j["sera"] = sera;
  j["mse"] = mse;
  j["mae"] = mae;
  j["delta_bgl"] = Optional(delta_bgl);
  j["sp"] = Optional(sp);
  j["attributes"] = Json::array();
  for (const auto& a : attributes) {
    j["attributes"].push_back(
        {{"attribute", a.attribute}, {"delta_bgl", Optional(a.delta_bgl)}, {"sp", Optional(a.sp)}});
  }
  j["group_mae"] = Json::array();
  for (const auto& g : group_mae) {
    j["group_mae"].push_back({{"group", g.group},
                              {"label", g.label},
                              {"count", g.count},
                              {"mae", Optional(g.mae)}});
  }
  j["mae_delta_tables"] = Json::array();
  for (const auto& t : mae_delta_tables) {
    Json rows = Json::array();
    for (const auto& r : t.rows) {
      rows.push_back({{"label", r.label},
                      {"n_priv", r.n_priv},
                      {"n_unpriv", r.n_unpriv},
                      {"mae_priv", Optional(r.mae_priv)},
                      {"mae_unpriv", Optional(r.mae_unpriv)},
                      {"delta_pct", Optional(r.delta_pct)},
                      {"trend", DeltaTrendName(r.trend)}});
    }
    j["mae_delta_tables"].push_back({{"delta_attribute", t.delta_attribute},
                                     {"condition_attribute", t.condition_attribute},
                                     {"rows", rows}});
  }
  j["errors"] = errors;
  return j.dump(indent);
}

FairnessReport FairnessReport::FromJson(const std::string& text) {
  FairnessReport r;
  try {
    const Json j = Json::parse(text);
    r.n = j.at("n").get<std::size_t>();
    r.id = ReadOptional(j.at("id"));
    r.sera = j.at("sera").get<double>();
    r.mse = j.at("mse").get<double>();
    r.mae = j.at("mae").get<double>();
    r.delta_bgl = ReadOptional(j.at("delta_bgl"));
    r.sp = ReadOptional(j.at("sp"));
    for (const auto& a : j.at("attributes")) {
      r.attributes.push_back({a.at("attribute").get<std::string>(),
                              ReadOptional(a.at("delta_bgl")), ReadOptional(a.at("sp"))});
    }
    for (const auto& g : j.at("group_mae")) {
      r.group_mae.push_back({g.at("group").get<GroupId>(), g.at("label").get<std::string>(),
                             g.at("count").get<std::size_t>(), ReadOptional(g.at("mae"))});
    }
    for (const auto& t : j.at("mae_delta_tables")) {
      MaeDeltaTable table;
      table.delta_attribute = t.at("delta_attribute").get<std::string>();
      table.condition_attribute = t.at("condition_attribute").get<std::string>();
      for (const auto& row : t.at("rows")) {
        MaeDeltaRow m;
        m.label = row.at("label").get<std::string>();
        m.n_priv = row.at("n_priv").get<std::size_t>();
        m.n_unpriv = row.at("n_unpriv").get<std::size_t>();
        m.mae_priv = ReadOptional(row.at("mae_priv"));
        m.mae_unpriv = ReadOptional(row.at("mae_unpriv"));
        m.delta_pct = ReadOptional(row.at("delta_pct"));
        m.trend = TrendFromName(row.at("trend").get<std::string>());
        table.rows.push_back(std::move(m));
      }
      r.mae_delta_tables.push_back(std::move(table));
    }
    r.errors = j.at("errors").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kInput, std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

std::string FairnessReport::CsvHeader() {
  return "n,id,sera,mse,mae,delta_bgl,sp\n";
}

std::string FairnessReport::CsvRow() const {
  return CsvLine({std::to_string(n), CsvOptional(id), FormatExact(sera),
                  FormatExact(mse), FormatExact(mae), CsvOptional(delta_bgl),
                  CsvOptional(sp)});
}

std::string FairnessReport::ToText() const {
  std::string out;
  out += fmt::format("samples     {}\n", n);
  out += fmt::format("MSE         {}\n", FormatRounded(mse));
  out += fmt::format("MAE         {}\n", FormatRounded(mae));
  out += fmt::format("SERA        {}\n", FormatRounded(sera));
  out += fmt::format("ID          {}\n", TextOptional(id));
  out += fmt::format("delta BGL   {}  (mean over attributes)\n", TextOptional(delta_bgl));
  out += fmt::format("SP (KS)     {}  (mean over attributes)\n", TextOptional(sp));
  for (const auto& a : attributes) {
    out += fmt::format("  {:<12} delta BGL {}  SP {}\n", a.attribute,
                       TextOptional(a.delta_bgl), TextOptional(a.sp));
  }
  out += "\nPer-group MAE\n";
  for (const auto& g : group_mae) {
    out += fmt::format("  [{}] {:<40} n={:<6} MAE {}\n", g.group, g.label, g.count,
                       g.mae ? FormatRounded(*g.mae) : "empty");
  }
  for (const auto& t : mae_delta_tables) {
    out += t.condition_attribute.empty()
               ? fmt::format("\nMAE by {} (delta % = (priv - unpriv) / unpriv)\n",
                             t.delta_attribute)
               : fmt::format("\nMAE by {} within {} (delta % = (priv - unpriv) / unpriv)\n",
                             t.delta_attribute, t.condition_attribute);
    out += fmt::format("  {:<18} {:>10} {:>10} {:>9}  {}\n", "", "priv", "unpriv",
                       "delta %", "vs All");
    for (const auto& r : t.rows) {
      out += fmt::format("  {:<18} {:>10} {:>10} {:>9}  {}\n", r.label,
                         TextOptional(r.mae_priv, 3), TextOptional(r.mae_unpriv, 3),
                         r.delta_pct ? fmt::format("{:+.1f}%", *r.delta_pct) : "n/a",
                         DeltaTrendName(r.trend));
    }
  }
  for (const auto& e : errors) out += "warning: " + e + "\n";
  return out;
}

FairnessReport FullReport(const GroupedDataset& ds, std::span<const double> preds,
                          const RelevanceFunction& phi) {
  CheckLengths(ds.size(), preds.size());
  FairnessReport r;
  r.n = ds.size();
  r.mse = MeanSquaredError(ds.targets(), preds);
  r.mae = MeanAbsoluteError(ds.targets(), preds);
  const SerCurveSet curves = SerCurveSet::Build(ds, preds, phi);
  r.sera = SeraFromCurves(curves);
  try {
    r.id = IntersectionalDivergence(curves);
  } catch (const Error& e) {
    r.errors.push_back(std::string("id: ") + e.what());
  }

  std::vector<double> bgl;
  std::vector<double> sp;
  for (std::size_t a = 0; a < ds.num_attributes(); ++a) {
    AttributeFairness f;
    f.attribute = ds.attribute_names()[a];
    try {
      f.delta_bgl = DeltaBgl(ds, preds, a);
      bgl.push_back(*f.delta_bgl);
    } catch (const Error& e) {
      r.errors.push_back("delta_bgl[" + f.attribute + "]: " + e.what());
    }
    try {
      f.sp = StatisticalParity(ds, preds, a);
      sp.push_back(*f.sp);
    } catch (const Error& e) {
      r.errors.push_back("sp[" + f.attribute + "]: " + e.what());
    }
    r.attributes.push_back(std::move(f));
  }
  if (!bgl.empty()) r.delta_bgl = AccurateSum(bgl) / static_cast<double>(bgl.size());
  if (!sp.empty()) r.sp = AccurateSum(sp) / static_cast<double>(sp.size());

  std::vector<CompensatedSum> abs_err(ds.num_groups());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    abs_err[static_cast<std::size_t>(ds.group_of()[i])].Add(
        std::abs(preds[i] - ds.targets()[i]));
  }
  for (std::size_t g = 0; g < ds.num_groups(); ++g) {
    GroupMae m;
    m.group = static_cast<GroupId>(g);
    m.label = ds.GroupLabel(m.group);
    m.count = ds.group_catalog()[g].count;
    if (m.count) m.mae = abs_err[g].Value() / static_cast<double>(m.count);
    r.group_mae.push_back(std::move(m));
  }

  if (ds.num_attributes() == 1) {
    r.mae_delta_tables.push_back(AllOnlyTable(ds, preds, 0));
  } else {
    for (std::size_t a = 0; a < ds.num_attributes(); ++a) {
      for (std::size_t c = 0; c < ds.num_attributes(); ++c) {
        if (a != c) r.mae_delta_tables.push_back(GroupMaeDeltaPct(ds, preds, a, c));
      }
    }
  }
  return r;
}

}  // namespace idfair
