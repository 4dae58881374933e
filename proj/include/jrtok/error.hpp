// Copyright 2026 The jrtok Authors.
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

namespace jrtok {

enum class ErrorCode {
  kDegenerateInput,
  kInvalidArgument,
  kTooShort,
  kShapeMismatch,
  kLengthMismatch,
  kNonScalarRoot,
  kOutOfRange,
  kEmptyCorpus,
  kEmptyDataset,
  kConfigInvalid,
  kCheckpointMismatch,
  kFormatError,
  kDigestMismatch,
  kStatsMissing,
  kIoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonScalarRoot: return "NonScalarRoot";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kCheckpointMismatch: return "CheckpointMismatch";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kDigestMismatch: return "DigestMismatch";
    case ErrorCode::kStatsMissing: return "StatsMissing";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace jrtok
