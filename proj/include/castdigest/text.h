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

#ifndef CASTDIGEST_TEXT_H_
#define CASTDIGEST_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace castdigest {

// Lowercased maximal runs of ASCII letters and digits; every other byte
// separates tokens.
std::vector<std::string> AlnumTokens(std::string_view text);

// Number of whitespace-delimited words.
std::size_t WhitespaceTokenCount(std::string_view text);

std::string AsciiLower(std::string_view text);

}  // namespace castdigest

#endif  // CASTDIGEST_TEXT_H_
