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

#include "http_util.h"

#include <string>

namespace castdigest::internal {

Url SplitUrl(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint must look like http://host:port, got '" +
                    std::string(url) + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Url out;
  if (path_start == std::string_view::npos) {
    out.origin = std::string(url);
    return out;
  }
  out.origin = std::string(url.substr(0, path_start));
  std::string_view prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.remove_suffix(1);
  out.prefix = std::string(prefix);
  return out;
}

void ThrowTransportError(httplib::Error error, std::string_view what) {
  const std::string message =
      std::string(what) + ": " + httplib::to_string(error);
  if (error == httplib::Error::ConnectionTimeout) {
    throw Error(ErrorCode::kTimeout, message);
  }
  throw Error(ErrorCode::kNetwork, message);
}

}  // namespace castdigest::internal
