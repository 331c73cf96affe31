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

#include <fmt/format.h>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "idfair/error.hpp"
#include "idfair/io.hpp"
#include "idfair/numeric.hpp"

namespace idfair {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema: return "schema-error";
    case ErrorKind::kEmptyData: return "empty-data";
    case ErrorKind::kDegenerateAttribute: return "degenerate-attribute";
    case ErrorKind::kSplit: return "split-error";
    case ErrorKind::kInput: return "input-error";
    case ErrorKind::kValidation: return "validation-error";
    case ErrorKind::kDegenerateDistribution: return "degenerate-distribution";
    case ErrorKind::kUndefinedMeasure: return "undefined-measure";
    case ErrorKind::kUndefinedLoss: return "undefined-loss";
    case ErrorKind::kDegenerateObjective: return "degenerate-objective";
    case ErrorKind::kParameter: return "parameter-error";
    case ErrorKind::kMissingArtifacts: return "missing-artifacts";
    case ErrorKind::kIo: return "io-error";
    case ErrorKind::kInternal: return "internal-error";
  }
  return "error";
}

std::string FormatExact(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", value);
}

std::string FormatRounded(double value, int decimals) {
  if (std::isnan(value)) return "nan";
  return fmt::format("{:.{}f}", value, decimals);
}

bool ParseDouble(const std::string& text, double& out) {
  const std::string s = Trim(text);
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return false;
  // strtod accepts "nan"/"inf"; those are missing values here.
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

// ---------------------------------------------------------------------------

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitList(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (Trim(s).empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(Trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::optional<std::size_t> CsvTable::Column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A blank line is not a record.
    if (!(record.size() == 1 && record[0].empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };

  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) Fail(ErrorKind::kInput, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) return table;
  table.header = std::move(records.front());
  for (auto& h : table.header) h = Trim(h);
  table.rows.assign(std::make_move_iterator(records.begin() + 1),
                    std::make_move_iterator(records.end()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != table.header.size()) {
      Fail(ErrorKind::kInput,
           fmt::format("CSV record {} has {} fields, header has {}", r + 2,
                       table.rows[r].size(), table.header.size()));
    }
  }
  return table;
}

CsvTable ReadCsv(const std::filesystem::path& path) {
  return ParseCsv(ReadTextFile(path));
}

std::string CsvEscape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string CsvLine(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line.push_back(',');
    line += CsvEscape(fields[i]);
  }
  line.push_back('\n');
  return line;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) Fail(ErrorKind::kIo, "write failed for " + path.string());
}

KeyValueConfig KeyValueConfig::Parse(const std::string& text) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorKind::kInput,
           fmt::format("config line {}: expected key = value", line_no));
    }
    const std::string key = Trim(trimmed.substr(0, eq));
    if (key.empty()) {
      Fail(ErrorKind::kInput, fmt::format("config line {}: empty key", line_no));
    }
    config.values_[key] = Trim(trimmed.substr(eq + 1));
  }
  return config;
}

KeyValueConfig KeyValueConfig::Load(const std::filesystem::path& path) {
  return Parse(ReadTextFile(path));
}

std::optional<std::string> KeyValueConfig::Get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::GetOr(const std::string& key,
                                  const std::string& fallback) const {
  return Get(key).value_or(fallback);
}

std::vector<std::string> KeyValueConfig::GetList(const std::string& key) const {
  const auto v = Get(key);
  if (!v) return {};
  return SplitList(*v);
}

}  // namespace idfair
