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

#ifndef CASTDIGEST_DEDUP_AUGMENT_H_
#define CASTDIGEST_DEDUP_AUGMENT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "castdigest/datastore.h"
#include "castdigest/segmenter.h"
#include "castdigest/summarizer.h"

namespace castdigest {

// Sentences shorter than this never count as repeated content.
inline constexpr std::size_t kMinRepeatTokens = 3;
inline constexpr std::size_t kDefaultGapTolerance = 2;
inline constexpr std::size_t kDefaultMinRunLength = 2;
inline constexpr std::size_t kDefaultAugmentationFactor = 20;

// Lowercase, punctuation removed, whitespace collapsed to single spaces.
std::string NormalizeSentence(std::string_view text);

// For each episode, the ascending indices of sentences (of at least
// kMinRepeatTokens words) whose normalised text also occurs in some other
// episode. Episodes without repeats are absent. Needs >= 2 episodes.
std::map<std::string, std::vector<std::size_t>> FindRepetitiveIndices(
    std::span<const SentenceDoc> corpus);

// Joins indices that are at most `gap_tolerance` missing positions apart and
// drops runs spanning fewer than `min_run_len` sentences.
std::vector<IndexRun> MergeAndClean(
    std::span<const std::size_t> indices,
    std::size_t gap_tolerance = kDefaultGapTolerance,
    std::size_t min_run_len = kDefaultMinRunLength);

struct RepetitiveRun {
  std::string episode_id;
  IndexRun run;
  std::vector<Sentence> sentences;  // copies of doc.sentences[first..last]

  std::vector<std::string> normalized_texts() const;
  bool operator==(const RepetitiveRun&) const = default;
};

class SegmentLibrary {
 public:
  SegmentLibrary() = default;
  explicit SegmentLibrary(std::vector<RepetitiveRun> runs);

  // Mines every episode of `corpus` and keeps the cleaned runs.
  static SegmentLibrary Build(std::span<const SentenceDoc> corpus,
                              std::size_t gap_tolerance = kDefaultGapTolerance,
                              std::size_t min_run_len = kDefaultMinRunLength);

  // Sorted by (episode_id, first).
  const std::vector<RepetitiveRun>& runs() const { return runs_; }
  bool empty() const { return runs_.empty(); }

  std::vector<IndexRun> RunsFor(std::string_view episode_id) const;
  std::map<std::string, std::vector<IndexRun>> RunsByEpisode() const;

  // {"episode_id", "first", "last", "texts", "normalized_texts", "spans"}
  // per line; spans are [start_s, end_s] pairs.
  std::string ToJsonl() const;
  static SegmentLibrary FromJsonl(std::string_view text);

 private:
  std::vector<RepetitiveRun> runs_;
};

struct AugmentedEpisode {
  SentenceDoc doc;
  std::vector<std::size_t> selected;
  bool replaced = false;  // false means the segment was prepended
  std::string injected_from;
  std::optional<std::string> warning;
};

// Injects a randomly drawn library segment from another episode: it replaces
// the episode's earliest repetitive run, or is prepended when the episode
// has none. If the selection overlaps that run the segment is prepended
// instead and a warning is set. Selected indices follow the shift, so they
// still point at the same sentence texts. Throws kEmptyLibrary when no
// segment from another episode exists.
AugmentedEpisode AugmentEpisode(const SentenceDoc& doc,
                                std::span<const std::size_t> selected,
                                const SegmentLibrary& library,
                                std::uint64_t seed);

// The originals followed, per episode, by `factor` augmented copies with ids
// "<id>#aug<j>", so the result holds n * (factor + 1) records. Augmented
// records carry provenance. Deterministic in `seed` regardless of `workers`.
Corpus BuildAugmentedDataset(const Corpus& corpus,
                             const SegmentLibrary& library,
                             std::size_t factor, std::uint64_t seed,
                             std::size_t workers = 1,
                             std::vector<std::string>* warnings = nullptr);

}  // namespace castdigest

#endif  // CASTDIGEST_DEDUP_AUGMENT_H_
