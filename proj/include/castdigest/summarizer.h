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

#ifndef CASTDIGEST_SUMMARIZER_H_
#define CASTDIGEST_SUMMARIZER_H_

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "castdigest/segmenter.h"

namespace castdigest {

// Inclusive range of sentence indices.
struct IndexRun {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const { return last - first + 1; }
  bool contains(std::size_t i) const { return i >= first && i <= last; }
  bool operator==(const IndexRun&) const = default;
};

// One score in [0, 1] per sentence, aligned by index.
struct SentenceScores {
  std::string episode_id;
  std::vector<double> scores;
};

// Chosen sentence indices, strictly ascending.
struct Selection {
  std::string episode_id;
  std::vector<std::size_t> indices;
  std::size_t k_requested = 0;

  bool operator==(const Selection&) const = default;
};

inline constexpr std::size_t kDefaultMaxTokens = 512;
inline constexpr std::size_t kDefaultTopK = 12;

// The first min(n, m) sentences.
Selection LeadN(const SentenceDoc& doc, std::size_t n);

// Longest prefix of whole sentences whose whitespace word count fits in
// `max_tokens`. The first sentence is always kept.
SentenceDoc TruncateTokens(const SentenceDoc& doc,
                           std::size_t max_tokens = kDefaultMaxTokens);

// The k best-scoring indices (ties go to the lower index), returned in
// ascending index order.
Selection SelectTopK(const SentenceScores& scores, std::size_t k);

// Throws kLengthMismatch or kScoreOutOfRange when `scores` does not fit `doc`.
void ValidateScores(const SentenceDoc& doc, const SentenceScores& scores);

// Deterministic offline scorer: cosine similarity between each sentence's
// term-frequency vector and the document centroid, min-max normalised.
// Sentences inside `repetitive_runs` score 0 and are left out of both the
// centroid and the normalisation.
SentenceScores ReferenceScores(const SentenceDoc& doc,
                               std::span<const IndexRun> repetitive_runs = {});

struct ScorerEndpoint {
  // "http://host:port[/prefix]" posts to {prefix}/score; "tcp://host:port"
  // speaks newline-delimited JSON over a plain socket.
  std::string url;
  Millis timeout{std::chrono::seconds(30)};
};

// Asks an out-of-process model for scores. Request:
//   {"episode_id": ..., "sentences": [text, ...]}
// Response:
//   {"episode_id": ..., "scores": [real, ...]}  or  {"error": "..."}
// Throws kNetwork / kTimeout on transport failure, kService for an error
// payload, and kLengthMismatch / kScoreOutOfRange for invalid responses.
SentenceScores ExternalScores(const ScorerEndpoint& endpoint,
                              const SentenceDoc& doc);

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual SentenceScores Score(const SentenceDoc& doc) const = 0;
  virtual std::string name() const = 0;
};

// Strictly decreasing scores, so top-k selection reproduces LEAD-k.
class LeadScorer : public Scorer {
 public:
  SentenceScores Score(const SentenceDoc& doc) const override;
  std::string name() const override { return "lead"; }
};

class ReferenceScorer : public Scorer {
 public:
  ReferenceScorer() = default;
  explicit ReferenceScorer(std::map<std::string, std::vector<IndexRun>> runs)
      : runs_(std::move(runs)) {}

  SentenceScores Score(const SentenceDoc& doc) const override;
  std::string name() const override { return "reference"; }

 private:
  std::map<std::string, std::vector<IndexRun>> runs_;
};

class ExternalScorer : public Scorer {
 public:
  explicit ExternalScorer(ScorerEndpoint endpoint)
      : endpoint_(std::move(endpoint)) {}

  SentenceScores Score(const SentenceDoc& doc) const override {
    return ExternalScores(endpoint_, doc);
  }
  std::string name() const override { return "external"; }

 private:
  ScorerEndpoint endpoint_;
};

// Scores the token-truncated prefix of `doc` with `scorer` and keeps the top
// k. Indices refer to `doc` itself since truncation keeps a prefix.
Selection Summarize(const SentenceDoc& doc, const Scorer& scorer,
                    std::size_t k, std::size_t max_tokens = kDefaultMaxTokens);

}  // namespace castdigest

#endif  // CASTDIGEST_SUMMARIZER_H_
