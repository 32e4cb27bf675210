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

#ifndef CASTDIGEST_SRC_HTTP_UTIL_H_
#define CASTDIGEST_SRC_HTTP_UTIL_H_

#include <string>
#include <string_view>

#include "castdigest/error.h"
#include "httplib.h"

namespace castdigest::internal {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash, possibly empty
};

// Splits "http://host:port/some/prefix" into origin and path prefix.
Url SplitUrl(std::string_view url);

// Maps a failed httplib result onto kTimeout or kNetwork.
[[noreturn]] void ThrowTransportError(httplib::Error error,
                                      std::string_view what);

}  // namespace castdigest::internal

#endif  // CASTDIGEST_SRC_HTTP_UTIL_H_
