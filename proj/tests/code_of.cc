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

#include "doctest.h"
#include "oracles.h"

namespace castdigest::testing {

ErrorCode CodeOf(const std::function<void()>& fn,
                 std::optional<std::size_t>* index) {
  try {
    fn();
  } catch (const Error& e) {
    if (index) *index = e.index();
    return e.code();
  }
  FAIL("expected castdigest::Error");
  return ErrorCode::kIo;
}

}  // namespace castdigest::testing
