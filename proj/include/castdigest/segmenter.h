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

#ifndef CASTDIGEST_SEGMENTER_H_
#define CASTDIGEST_SEGMENTER_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "castdigest/transcript.h"

namespace castdigest {

struct Sentence {
  std::size_t index = 0;
  std::string text;
  Millis start{0};
  Millis end{0};
  // Half-open range into Transcript::tokens. Zero-width for sentences that
  // were loaded from storage or injected by augmentation.
  std::size_t token_begin = 0;
  std::size_t token_end = 0;

  Millis duration() const { return end - start; }
  bool operator==(const Sentence&) const = default;
};

struct SentenceDoc {
  std::string episode_id;
  std::vector<Sentence> sentences;
  std::string audio_ref;
  Millis duration{0};

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  bool operator==(const SentenceDoc&) const = default;
};

inline constexpr double kDefaultPauseThresholdSeconds = 2.0;

// Splits a transcript into sentences. A boundary follows every ".", "?" or
// "!" token, and falls between two words whose silent gap is strictly longer
// than `pause_threshold_s`. Punctuation belongs to the sentence before it;
// punctuation with no open sentence is kept in a token range but left out of
// the text. Throws kEmptyDocument when there are no words at all.
SentenceDoc Segment(const Transcript& transcript,
                    double pause_threshold_s = kDefaultPauseThresholdSeconds);

// Renumbers sentence indices 0..m-1 in place.
void Reindex(SentenceDoc& doc);

// JSON lines, one {"index", "text", "start_s", "end_s"} object per sentence.
std::string SentencesToJsonl(const SentenceDoc& doc);
std::vector<Sentence> SentencesFromJsonl(std::string_view text);

}  // namespace castdigest

#endif  // CASTDIGEST_SEGMENTER_H_
