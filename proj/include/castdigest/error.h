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

#ifndef CASTDIGEST_ERROR_H_
#define CASTDIGEST_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace castdigest {

enum class ErrorCode {
  // Input problems: the caller handed us something unusable.
  kMalformedDocument,
  kMissingTimestamp,
  kNonMonotoneTimestamp,
  kInvalidArgument,
  kEmptyDocument,
  kIndexOutOfRange,
  kUnsupportedEncoding,
  kTruncatedFile,
  kSchemaVersion,
  kDuplicateId,
  kNotFound,
  kValidation,
  kIo,
  // Processing problems: something failed while doing the work.
  kNetwork,
  kService,
  kTimeout,
  kLengthMismatch,
  kScoreOutOfRange,
  kSpanOutOfRange,
  kEmptyLibrary,
  kInfeasible,
};

std::string_view ErrorCodeName(ErrorCode code);

// True for codes caused by bad input rather than a failure during processing.
bool IsInputError(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const { return code_; }
  // Position of the offending element (ASR item, sentence, span), if any.
  std::optional<std::size_t> index() const { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace castdigest

#endif  // CASTDIGEST_ERROR_H_
