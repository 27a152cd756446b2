// Copyright 2026 The HierGen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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

namespace hiergen {

// Numeric values are part of the C ABI (see include/hiergen/hiergen.h).
enum class ErrorCode : int {
  kMalformedJson = 1,
  kSchemaViolation = 2,
  kInvariantViolation = 3,
  kMissingFile = 4,
  kImageDecodeError = 5,
  kRendererUnavailable = 6,
  kRenderTimeout = 7,
  kNavigationError = 8,
  kEmptyCorpus = 9,
  kDimensionMismatch = 10,
  kEmptyRegion = 11,
  kBackendUnavailable = 12,
  kPredictionUnparseable = 13,
  kUnrepairable = 14,
  kEndpointError = 15,
  kEmptyCompletion = 16,
  kNoCodeFound = 17,
  kDocumentTooLarge = 18,
  kMissingFragment = 19,
  kDuplicateLeafPath = 20,
  kParseError = 21,
  kMarkerCorruption = 22,
  kTooSmall = 23,
  kEmbedderUnavailable = 24,
  kInvalidArgument = 25,
  kIoError = 26,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace hiergen
