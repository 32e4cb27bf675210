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

#include "castdigest/transcript.h"

#include <charconv>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>

#include "castdigest/error.h"
#include "http_util.h"
#include "json.hpp"

namespace castdigest {
namespace {

using nlohmann::json;

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

// Reads a decimal string (or a JSON number, which some exporters emit).
std::string DecimalText(const json& value, std::size_t item,
                        std::string_view field) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) return value.dump();
  throw Error(ErrorCode::kMalformedDocument,
              "item " + std::to_string(item) + ": field '" +
                  std::string(field) + "' is not a decimal value",
              item);
}

double ParseConfidence(const json& value, std::size_t item) {
  const std::string text = DecimalText(value, item, "confidence");
  double out = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !(out >= 0.0 && out <= 1.0)) {
    throw Error(ErrorCode::kMalformedDocument,
                "item " + std::to_string(item) + ": confidence '" + text +
                    "' is not a number in [0, 1]",
                item);
  }
  return out;
}

std::string FormatConfidence(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Millis ParseItemTime(const json& item, const char* field, std::size_t index) {
  if (!item.contains(field) || item[field].is_null()) {
    throw Error(ErrorCode::kMissingTimestamp,
                "item " + std::to_string(index) + ": pronunciation lacks " +
                    field,
                index);
  }
  try {
    return ParseSeconds(DecimalText(item[field], index, field));
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedDocument,
                "item " + std::to_string(index) + ": " + e.what(), index);
  }
}

}  // namespace

Millis ParseSeconds(std::string_view text) {
  auto fail = [&]() -> Error {
    return Error(ErrorCode::kMalformedDocument,
                 "'" + std::string(text) + "' is not decimal seconds");
  };
  std::size_t pos = 0;
  if (pos < text.size() && text[pos] == '+') ++pos;
  if (pos < text.size() && text[pos] == '-') throw fail();
  std::int64_t whole = 0;
  std::size_t whole_digits = 0;
  while (pos < text.size() && IsDigit(text[pos])) {
    if (whole > (INT64_MAX / 1000 - 9) / 10) throw fail();
    whole = whole * 10 + (text[pos] - '0');
    ++pos;
    ++whole_digits;
  }
  std::int64_t frac_ms = 0;
  std::size_t frac_digits = 0;
  bool round_up = false;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && IsDigit(text[pos])) {
      if (frac_digits < 3) {
        frac_ms = frac_ms * 10 + (text[pos] - '0');
      } else if (frac_digits == 3) {
        round_up = text[pos] >= '5';
      }
      ++pos;
      ++frac_digits;
    }
  }
  if (pos != text.size() || whole_digits + frac_digits == 0) throw fail();
  for (std::size_t i = frac_digits; i < 3; ++i) frac_ms *= 10;
  return Millis(whole * 1000 + frac_ms + (round_up ? 1 : 0));
}

std::string FormatSeconds(Millis value) {
  const std::int64_t ms = value.count();
  const std::int64_t magnitude = ms < 0 ? -ms : ms;
  std::string frac = std::to_string(magnitude % 1000);
  frac.insert(0, 3 - frac.size(), '0');
  return (ms < 0 ? "-" : "") + std::to_string(magnitude / 1000) + "." + frac;
}

Transcript ParseTranscript(std::string_view raw, std::string episode_id,
                           std::string audio_ref,
                           std::optional<Millis> duration) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("results") ||
      !doc["results"].is_object() || !doc["results"].contains("items") ||
      !doc["results"]["items"].is_array()) {
    throw Error(ErrorCode::kMalformedDocument,
                "document has no results.items array");
  }

  Transcript out;
  out.episode_id = std::move(episode_id);
  out.audio_ref = std::move(audio_ref);

  const json& items = doc["results"]["items"];
  out.tokens.reserve(items.size());
  std::optional<Millis> previous_end;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const json& item = items[i];
    const auto malformed = [i](const std::string& what) {
      return Error(ErrorCode::kMalformedDocument,
                   "item " + std::to_string(i) + ": " + what, i);
    };
    if (!item.is_object() || !item.contains("type") ||
        !item["type"].is_string()) {
      throw malformed("missing type");
    }
    if (!item.contains("alternatives") || !item["alternatives"].is_array() ||
        item["alternatives"].empty() || !item["alternatives"][0].is_object()) {
      throw malformed("missing alternatives");
    }
    const json& best = item["alternatives"][0];
    if (!best.contains("content") || !best["content"].is_string()) {
      throw malformed("alternative has no content");
    }

    WordToken token;
    token.content = best["content"].get<std::string>();
    token.confidence =
        best.contains("confidence") ? ParseConfidence(best["confidence"], i)
                                    : 1.0;
    const std::string type = item["type"].get<std::string>();
    if (type == "pronunciation") {
      token.kind = TokenKind::kPronunciation;
      Millis start = ParseItemTime(item, "start_time", i);
      Millis end = ParseItemTime(item, "end_time", i);
      if (end < start) throw malformed("end_time precedes start_time");
      if (previous_end && start < *previous_end) {
        if (*previous_end - start > kMaxTimestampRegression) {
          throw Error(ErrorCode::kNonMonotoneTimestamp,
                      "item " + std::to_string(i) + ": starts " +
                          FormatSeconds(*previous_end - start) +
                          " s before the previous word ends",
                      i);
        }
        start = *previous_end;
        if (end < start) end = start;
      }
      token.start = start;
      token.end = end;
      previous_end = end;
    } else if (type == "punctuation") {
      token.kind = TokenKind::kPunctuation;
    } else {
      throw malformed("unknown item type '" + type + "'");
    }
    out.tokens.push_back(std::move(token));
  }

  const Millis last_end = previous_end.value_or(Millis(0));
  if (!duration && doc.contains("duration_s")) {
    duration = ParseSeconds(DecimalText(doc["duration_s"], 0, "duration_s"));
  }
  out.duration = duration.value_or(last_end);
  if (last_end > out.duration) {
    throw Error(ErrorCode::kMalformedDocument,
                "words extend past the audio duration of " +
                    FormatSeconds(out.duration) + " s");
  }
  return out;
}

std::string SerializeTranscript(const Transcript& transcript) {
  json items = json::array();
  for (const WordToken& token : transcript.tokens) {
    json item;
    json alternative = {{"content", token.content},
                        {"confidence", FormatConfidence(token.confidence)}};
    item["alternatives"] = json::array({alternative});
    if (token.is_pronunciation()) {
      item["type"] = "pronunciation";
      item["start_time"] = FormatSeconds(token.start.value_or(Millis(0)));
      item["end_time"] = FormatSeconds(token.end.value_or(Millis(0)));
    } else {
      item["type"] = "punctuation";
    }
    items.push_back(std::move(item));
  }
  json doc = {{"episode_id", transcript.episode_id},
              {"audio_ref", transcript.audio_ref},
              {"duration_s", FormatSeconds(transcript.duration)},
              {"results", {{"items", std::move(items)}}}};
  return doc.dump(2) + "\n";
}

std::string FetchTranscription(const AsrServiceConfig& config,
                               std::string_view audio_ref) {
  const internal::Url url = internal::SplitUrl(config.endpoint);
  httplib::Client client(url.origin);
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_read_timeout(std::chrono::seconds(60));
  httplib::Headers headers;
  if (!config.credentials.empty()) {
    headers.emplace("Authorization", "Bearer " + config.credentials);
  }

  const auto service_error = [](const httplib::Result& res,
                                std::string_view what) {
    std::string reason = res->body;
    try {
      const json body = json::parse(res->body);
      if (body.contains("error")) reason = body["error"].get<std::string>();
    } catch (const std::exception&) {
    }
    return Error(ErrorCode::kService, std::string(what) + " returned HTTP " +
                                          std::to_string(res->status) + ": " +
                                          reason);
  };

  const json submit_body = {{"audio_ref", std::string(audio_ref)}};
  auto submitted = client.Post(url.prefix + "/jobs", headers,
                               submit_body.dump(), "application/json");
  if (!submitted) internal::ThrowTransportError(submitted.error(), "submit");
  if (submitted->status / 100 != 2) throw service_error(submitted, "submit");

  std::string job_id;
  try {
    job_id = json::parse(submitted->body).at("job_id").get<std::string>();
  } catch (const std::exception&) {
    throw Error(ErrorCode::kService, "submit response carries no job_id");
  }

  const auto deadline = std::chrono::steady_clock::now() + config.timeout;
  const std::string job_path = url.prefix + "/jobs/" + job_id;
  while (true) {
    auto status = client.Get(job_path, headers);
    if (!status) internal::ThrowTransportError(status.error(), "poll");
    if (status->status / 100 != 2) throw service_error(status, "poll");
    std::string state;
    std::string reason;
    try {
      const json body = json::parse(status->body);
      state = body.at("status").get<std::string>();
      if (body.contains("failure_reason") &&
          body["failure_reason"].is_string()) {
        reason = body["failure_reason"].get<std::string>();
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::kService, "job status response is malformed");
    }
    if (state == "COMPLETED") break;
    if (state == "FAILED") {
      throw Error(ErrorCode::kService, "transcription job " + job_id +
                                           " failed: " + reason);
    }
    if (std::chrono::steady_clock::now() + config.poll_interval > deadline) {
      throw Error(ErrorCode::kTimeout, "transcription job " + job_id +
                                           " still " + state + " at deadline");
    }
    std::this_thread::sleep_for(config.poll_interval);
  }

  auto result = client.Get(job_path + "/result", headers);
  if (!result) internal::ThrowTransportError(result.error(), "result");
  if (result->status / 100 != 2) throw service_error(result, "result");
  return result->body;
}

}  // namespace castdigest
