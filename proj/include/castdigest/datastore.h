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

#ifndef CASTDIGEST_DATASTORE_H_
#define CASTDIGEST_DATASTORE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "castdigest/audio.h"
#include "castdigest/segmenter.h"
#include "castdigest/transcript.h"

namespace castdigest {

// Committed summaries must last between these two bounds, inclusive.
inline constexpr Millis kMinSummaryDuration{30'000};
inline constexpr Millis kMaxSummaryDuration{120'000};

inline constexpr int kCorpusSchemaVersion = 1;

struct Annotation {
  std::string episode_id;
  std::vector<std::size_t> selected_indices;
  std::string annotator_id;
  std::string created_at;  // ISO-8601 UTC
  int revision = 0;

  bool operator==(const Annotation&) const = default;
};

struct Provenance {
  enum class Kind { kOriginal, kAugmented };
  Kind kind = Kind::kOriginal;
  std::string source_id;  // augmented only
  std::uint64_t seed = 0;  // augmented only

  bool operator==(const Provenance&) const = default;
};

struct CorpusRecord {
  SentenceDoc doc;  // carries episode_id, audio_ref and duration
  std::string series_id;
  std::string title;
  std::string description;
  std::optional<Annotation> annotation;
  Provenance provenance;

  const std::string& episode_id() const { return doc.episode_id; }
  bool operator==(const CorpusRecord&) const = default;
};

using Corpus = std::vector<CorpusRecord>;

// Sum of the selected sentences' durations. Throws kIndexOutOfRange.
Millis SummaryDuration(const SentenceDoc& doc,
                       std::span<const std::size_t> indices);

// Empty string when `indices` would make a committable summary, otherwise a
// short human-readable reason ("below 30s minimum", ...). Index problems
// throw instead.
std::string SummaryValidityReason(const SentenceDoc& doc,
                                  std::span<const std::size_t> indices);

// Throws kIndexOutOfRange for bad indices and kValidation for unordered or
// duplicate indices or a duration outside the committable range.
void ValidateAnnotation(const SentenceDoc& doc, const Annotation& annotation);

// 1 at selected sentences, 0 elsewhere.
std::vector<int> LabelsFromAnnotation(const SentenceDoc& doc,
                                      const Annotation& annotation);

std::string CorpusRecordToJson(const CorpusRecord& record);
CorpusRecord CorpusRecordFromJson(std::string_view line);

// JSON lines sorted by episode_id. Both directions throw kDuplicateId;
// loading throws kSchemaVersion for records newer than this build.
std::string SerializeCorpus(const Corpus& corpus);
Corpus ParseCorpus(std::string_view text);
void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus LoadCorpus(const std::filesystem::path& path);

std::string CurrentUtcTimestamp();

// A corpus directory: corpus.jsonl, audio/ for WAV files and an append-only
// annotation_history.jsonl. Reads may run concurrently; annotation writes are
// serialised per episode.
class Datastore {
 public:
  static constexpr std::string_view kCorpusFile = "corpus.jsonl";
  static constexpr std::string_view kHistoryFile = "annotation_history.jsonl";

  explicit Datastore(std::filesystem::path root);

  Datastore(const Datastore&) = delete;
  Datastore& operator=(const Datastore&) = delete;

  const std::filesystem::path& root() const { return root_; }

  std::vector<CorpusRecord> Snapshot() const;
  std::optional<CorpusRecord> Find(std::string_view episode_id) const;

  // audio_ref resolved against the store root when relative.
  std::filesystem::path AudioPath(const CorpusRecord& record) const;

  // Validates, assigns the next revision, appends to the history and rewrites
  // corpus.jsonl. Returns the new revision. Nothing is written on failure.
  int CommitAnnotation(std::string_view episode_id,
                       std::vector<std::size_t> indices,
                       std::string annotator_id);

  // Every committed revision of an episode, oldest first.
  std::vector<Annotation> History(std::string_view episode_id) const;

 private:
  std::mutex& EpisodeLock(const std::string& episode_id);
  void PersistLocked() const;

  std::filesystem::path root_;
  mutable std::shared_mutex corpus_mutex_;
  std::map<std::string, CorpusRecord, std::less<>> records_;
  mutable std::mutex file_mutex_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> episode_locks_;
};

struct FixtureParams {
  int n_series = 19;
  double episodes_per_series_mean = 16.3;
  double episodes_per_series_sd = 6.28;
  double selected_mean = 14.57;
  double selected_sd = 7.01;
  int sample_rate = 8000;
};

struct FixtureEpisode {
  CorpusRecord record;
  Transcript transcript;  // word-level source that segments into record.doc
};

// Synthetic podcast corpus. Every series shares a planted intro, a corpus-
// wide sponsor read recurs in some episodes, and each annotation is a
// contiguous block of topical sentences lasting 30-120 s. Deterministic in
// `seed`. Throws kInfeasible for parameters it cannot honour.
std::vector<FixtureEpisode> GenerateFixtureCorpus(const FixtureParams& params,
                                                  std::uint64_t seed);

// Tone bursts for every word of the transcript, silence elsewhere; the clip
// lasts exactly the transcript duration.
AudioClip RenderFixtureAudio(const Transcript& transcript, int sample_rate);

// Writes corpus.jsonl, transcripts/<id>.json and (optionally) audio/<id>.wav.
void WriteFixtureDataset(std::span<const FixtureEpisode> episodes,
                         const std::filesystem::path& root, bool with_audio,
                         int sample_rate);

}  // namespace castdigest

#endif  // CASTDIGEST_DATASTORE_H_
