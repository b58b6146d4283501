// Copyright 2026 The lidarsyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lidarsyn {

enum class ErrorCode {
  kInvalidInput,
  kEmptyInput,
  kIo,
  kParse,
  kDegenerateGeometry,
  kOutOfRange,
  kEmptyMesh,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kIo: return "io error";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kDegenerateGeometry: return "degenerate geometry";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kEmptyMesh: return "empty mesh";
  }
  return "unknown";
}

/// Every library failure is reported through this exception type; the code
/// classifies it so callers (the CLI in particular) can map it to exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace lidarsyn
