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

#ifndef CASTDIGEST_SRC_FILE_UTIL_H_
#define CASTDIGEST_SRC_FILE_UTIL_H_

#include <filesystem>
#include <string>

namespace castdigest::internal {

// Whole file as bytes. Throws kIo.
std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void WriteFileAtomically(const std::filesystem::path& path,
                         const std::string& contents);

}  // namespace castdigest::internal

#endif  // CASTDIGEST_SRC_FILE_UTIL_H_
