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

#ifndef CASTDIGEST_TRANSCRIPT_H_
#define CASTDIGEST_TRANSCRIPT_H_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace castdigest {

// All timestamps are whole milliseconds; seconds only appear at the edges
// (file formats, wire protocols).
using Millis = std::chrono::milliseconds;

enum class TokenKind { kPronunciation, kPunctuation };

// One ASR item. Pronunciations carry timestamps, punctuation never does.
struct WordToken {
  std::string content;
  TokenKind kind = TokenKind::kPronunciation;
  std::optional<Millis> start;
  std::optional<Millis> end;
  double confidence = 1.0;

  bool is_pronunciation() const { return kind == TokenKind::kPronunciation; }
  bool operator==(const WordToken&) const = default;
};

struct Transcript {
  std::string episode_id;
  std::vector<WordToken> tokens;
  std::string audio_ref;
  Millis duration{0};

  bool operator==(const Transcript&) const = default;
};

// Largest backwards jump of a pronunciation start (relative to the previous
// pronunciation end) that is clamped instead of rejected.
inline constexpr Millis kMaxTimestampRegression{500};

// Parses "12.345" style decimal seconds into milliseconds, rounding half up
// beyond the third fractional digit. Throws kMalformedDocument.
Millis ParseSeconds(std::string_view text);

// Renders milliseconds as decimal seconds with three fractional digits.
std::string FormatSeconds(Millis value);

// Parses an ASR result document (results.items[] with type, alternatives[0]
// content/confidence and start_time/end_time for pronunciations).
//
// Only the top alternative is read. A pronunciation that starts before the
// previous pronunciation ended is clamped to that end when the regression is
// at most kMaxTimestampRegression, and rejected otherwise. When `duration` is
// absent it is taken from the document's "duration_s" field, falling back to
// the last pronunciation end. Failures throw castdigest::Error carrying the
// offending item index; nothing is returned on failure.
Transcript ParseTranscript(std::string_view raw, std::string episode_id,
                           std::string audio_ref,
                           std::optional<Millis> duration = std::nullopt);

// Writes `transcript` in the same ASR item format ParseTranscript reads, plus
// top-level episode_id/audio_ref/duration_s fields.
std::string SerializeTranscript(const Transcript& transcript);

struct AsrServiceConfig {
  // Base URL, e.g. "http://127.0.0.1:8080" or "http://host/prefix".
  std::string endpoint;
  std::string credentials;
  Millis poll_interval{200};
  Millis timeout{std::chrono::minutes(10)};
};

// Submits `audio_ref` to a transcription service and returns the finished
// result document byte for byte.
//
//   POST {endpoint}/jobs            {"audio_ref": ...}  -> {"job_id": ...}
//   GET  {endpoint}/jobs/{id}       -> {"status": QUEUED|IN_PROGRESS|
//                                       COMPLETED|FAILED, "failure_reason"}
//   GET  {endpoint}/jobs/{id}/result -> the ASR result document
//
// Credentials travel as "Authorization: Bearer ...". Throws kNetwork when the
// service cannot be reached, kService for FAILED jobs or error responses
// (message carries the service's reason), and kTimeout when the job does not
// finish within config.timeout.
std::string FetchTranscription(const AsrServiceConfig& config,
                               std::string_view audio_ref);

}  // namespace castdigest

#endif  // CASTDIGEST_TRANSCRIPT_H_
