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

#ifndef CASTDIGEST_CLI_H_
#define CASTDIGEST_CLI_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace castdigest {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitProcessingError = 3;

// Environment variable holding the transcription service credentials.
inline constexpr const char* kAsrCredentialsEnv = "CASTDIGEST_ASR_CREDENTIALS";

// Settings shared by every command. Values come from --config (key=value
// lines), then flags.
struct PipelineConfig {
  double pause_threshold_s = 2.0;
  std::size_t top_k = 12;
  std::size_t max_tokens = 512;
  std::string scorer = "reference";  // lead | reference | external
  std::string scorer_endpoint;
  std::size_t factor = 20;
  std::size_t k_folds = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  // Throws kInvalidArgument for non-positive numbers or an unknown scorer.
  void Validate() const;
};

// Runs one command. `args` excludes the program name. Results go to `out`
// unless --out names a destination; diagnostics go to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace castdigest

#endif  // CASTDIGEST_CLI_H_
