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

#ifndef IDFAIR_ERROR_HPP_
#define IDFAIR_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace idfair {

enum class ErrorKind {
  kSchema,
  kEmptyData,
  kDegenerateAttribute,
  kSplit,
  kInput,
  kValidation,
  kDegenerateDistribution,
  kUndefinedMeasure,
  kUndefinedLoss,
  kDegenerateObjective,
  kParameter,
  kMissingArtifacts,
  kIo,
  kInternal,
};

std::string_view ErrorKindName(ErrorKind kind);

// Every failure surfaced by the library is an idfair::Error carrying a kind,
// so callers (the CLI, the experiment harness) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace idfair

#endif  // IDFAIR_ERROR_HPP_
