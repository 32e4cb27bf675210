// Copyright 2026 The castdigest Authors.
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

#include "castdigest/error.h"

namespace castdigest {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "malformed_document";
    case ErrorCode::kMissingTimestamp: return "missing_timestamp";
    case ErrorCode::kNonMonotoneTimestamp: return "non_monotone_timestamp";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kEmptyDocument: return "empty_document";
    case ErrorCode::kIndexOutOfRange: return "index_out_of_range";
    case ErrorCode::kUnsupportedEncoding: return "unsupported_encoding";
    case ErrorCode::kTruncatedFile: return "truncated_file";
    case ErrorCode::kSchemaVersion: return "schema_version";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kNetwork: return "network";
    case ErrorCode::kService: return "service";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kScoreOutOfRange: return "score_out_of_range";
    case ErrorCode::kSpanOutOfRange: return "span_out_of_range";
    case ErrorCode::kEmptyLibrary: return "empty_library";
    case ErrorCode::kInfeasible: return "infeasible";
  }
  return "unknown";
}

bool IsInputError(ErrorCode code) {
  return static_cast<int>(code) <= static_cast<int>(ErrorCode::kIo);
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      index_(index) {}

}  // namespace castdigest
