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

#ifndef IDFAIR_MANIFEST_HPP_
#define IDFAIR_MANIFEST_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace idfair {

inline constexpr const char* kVersion = "0.1.0";

// Provenance written next to every output file as <file>.manifest.json:
// the command, every parameter that shaped the output, the inputs and a
// content hash of the output itself.
struct Manifest {
  std::string command;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> inputs;

  // JSON with stable key order for `output`, whose contents are `text`.
  std::string ToJson(const std::filesystem::path& output,
                     const std::string& text) const;
};

// 64-bit FNV-1a, hex encoded.
std::string ContentHash(const std::string& text);

// Writes `text` to `path` and its manifest to `path` + ".manifest.json".
void WriteWithManifest(const std::filesystem::path& path, const std::string& text,
                       const Manifest& manifest);

}  // namespace idfair

#endif  // IDFAIR_MANIFEST_HPP_
