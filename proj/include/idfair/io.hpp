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

#ifndef IDFAIR_IO_HPP_
#define IDFAIR_IO_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace idfair {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or nullopt.
  std::optional<std::size_t> Column(const std::string& name) const;
};

// RFC-4180 reader: quoted fields, doubled quotes, embedded separators and
// line breaks, CRLF or LF endings. The first record is the header. A leading
// UTF-8 byte order mark is skipped.
CsvTable ParseCsv(const std::string& text);
CsvTable ReadCsv(const std::filesystem::path& path);

// Quotes a field only when it needs it.
std::string CsvEscape(const std::string& field);
std::string CsvLine(const std::vector<std::string>& fields);

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

// `key = value` configuration file. Blank lines and lines starting with '#'
// are ignored; keys are case-sensitive; a repeated key overrides.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(const std::string& text);
  static KeyValueConfig Load(const std::filesystem::path& path);

  bool Has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> Get(const std::string& key) const;
  std::string GetOr(const std::string& key, const std::string& fallback) const;
  // Comma separated list with blanks trimmed; missing key gives empty list.
  std::vector<std::string> GetList(const std::string& key) const;
  void Set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::string Trim(const std::string& s);
std::vector<std::string> SplitList(const std::string& s, char sep = ',');

}  // namespace idfair

#endif  // IDFAIR_IO_HPP_
