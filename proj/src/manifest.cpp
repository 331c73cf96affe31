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

#include "idfair/manifest.hpp"

#include <fmt/format.h>

#include <cstdint>
#include <json.hpp>

#include "idfair/io.hpp"

namespace idfair {

std::string ContentHash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string Manifest::ToJson(const std::filesystem::path& output,
                             const std::string& text) const {
  nlohmann::ordered_json j;
  j["tool"] = "idfair";
  j["version"] = kVersion;
  j["command"] = command;
  j["output"] = output.filename().string();
  j["bytes"] = text.size();
  j["fnv1a64"] = ContentHash(text);
  j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : parameters) j["parameters"][k] = v;
  j["inputs"] = inputs;
  return j.dump(2) + "\n";
}

void WriteWithManifest(const std::filesystem::path& path, const std::string& text,
                       const Manifest& manifest) {
  WriteTextFile(path, text);
  std::filesystem::path mpath = path;
  mpath += ".manifest.json";
  WriteTextFile(mpath, manifest.ToJson(path, text));
}

}  // namespace idfair
