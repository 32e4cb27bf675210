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

#ifndef CASTDIGEST_TESTS_ORACLES_H_
#define CASTDIGEST_TESTS_ORACLES_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "castdigest/audio.h"
#include "castdigest/datastore.h"
#include "castdigest/error.h"
#include "castdigest/segmenter.h"
#include "castdigest/transcript.h"

namespace castdigest::testing {

using Tokens = std::vector<std::string>;

// Brute-force ROUGE: n-grams are listed explicitly and matched by linear
// scans, LCS is the longest subsequence of one side found by enumerating
// every subset of its positions. Only usable for short inputs.
struct OracleCounts {
  std::size_t overlap = 0;
  std::size_t candidate_total = 0;
  std::size_t reference_total = 0;
};

OracleCounts OracleRougeN(const Tokens& candidate, const Tokens& reference,
                          std::size_t n);
std::size_t OracleLcs(const Tokens& a, const Tokens& b);
OracleCounts OracleRougeL(const Tokens& candidate, const Tokens& reference);
// F = 2 * overlap / (candidate_total + reference_total), or 0.
double OracleF(const OracleCounts& c);

// Random token list over a small alphabet so that overlaps are common.
Tokens RandomTokens(std::mt19937_64& rng, std::size_t max_len,
                    std::size_t alphabet);

// Word-level transcript with random pauses and punctuation.
Transcript RandomTranscript(std::mt19937_64& rng, std::size_t n_words);

// Builds a pronunciation / punctuation token.
WordToken Word(std::string text, double start_s, double end_s,
               double confidence = 0.9);
WordToken Mark(std::string text, double confidence = 0.9);

// Distinct-valued mono clip: sample i holds a value derived from i.
AudioClip RampClip(int sample_rate, std::size_t frames, int channels = 1);

// Document whose sentence i lasts durations_s[i] seconds, back to back from
// t = 0 with `gap_s` of silence between sentences.
SentenceDoc TimedDoc(const std::string& episode_id,
                     const std::vector<double>& durations_s,
                     double gap_s = 0.0);

// Code of the castdigest::Error thrown by `fn`; fails the test when nothing
// is thrown. Stores the error's index when asked.
ErrorCode CodeOf(const std::function<void()>& fn,
                 std::optional<std::size_t>* index = nullptr);

// A fresh, empty directory under the system temp dir.
std::string TempDir(const std::string& tag);

}  // namespace castdigest::testing

#endif  // CASTDIGEST_TESTS_ORACLES_H_
