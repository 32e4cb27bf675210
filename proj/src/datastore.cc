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

#include "castdigest/datastore.h"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "castdigest/error.h"
#include "file_util.h"
#include "json.hpp"

namespace castdigest {
namespace {

using nlohmann::json;

double ToSeconds(Millis t) { return static_cast<double>(t.count()) / 1000.0; }
Millis FromSeconds(double s) { return Millis(std::llround(s * 1000.0)); }

json AnnotationToJson(const Annotation& a) {
  return {{"indices", a.selected_indices},
          {"annotator_id", a.annotator_id},
          {"created_at", a.created_at},
          {"revision", a.revision}};
}

Annotation AnnotationFromJson(const json& j, const std::string& episode_id) {
  Annotation a;
  a.episode_id = episode_id;
  a.selected_indices = j.at("indices").get<std::vector<std::size_t>>();
  a.annotator_id = j.value("annotator_id", "");
  a.created_at = j.value("created_at", "");
  a.revision = j.value("revision", 0);
  return a;
}

void RequireUniqueIds(const Corpus& corpus) {
  std::set<std::string_view> seen;
  for (const CorpusRecord& r : corpus) {
    if (!seen.insert(r.episode_id()).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "episode_id '" + r.episode_id() + "' appears twice");
    }
  }
}

}  // namespace

Millis SummaryDuration(const SentenceDoc& doc,
                       std::span<const std::size_t> indices) {
  Millis total{0};
  for (std::size_t i : indices) {
    if (i >= doc.size()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "sentence " + std::to_string(i) + " not in " +
                      doc.episode_id,
                  i);
    }
    total += doc.sentences[i].duration();
  }
  return total;
}

std::string SummaryValidityReason(const SentenceDoc& doc,
                                  std::span<const std::size_t> indices) {
  const Millis total = SummaryDuration(doc, indices);
  if (indices.empty()) return "no sentences selected";
  if (total < kMinSummaryDuration) return "below 30s minimum";
  if (total > kMaxSummaryDuration) return "above 120s maximum";
  return "";
}

void ValidateAnnotation(const SentenceDoc& doc, const Annotation& annotation) {
  const auto& indices = annotation.selected_indices;
  for (std::size_t n = 1; n < indices.size(); ++n) {
    if (indices[n] <= indices[n - 1]) {
      throw Error(ErrorCode::kValidation,
                  "indices must be strictly ascending", n);
    }
  }
  const std::string reason = SummaryValidityReason(doc, indices);
  if (!reason.empty()) {
    throw Error(ErrorCode::kValidation,
                "summary of " + FormatSeconds(SummaryDuration(doc, indices)) +
                    " s rejected: " + reason);
  }
}

std::vector<int> LabelsFromAnnotation(const SentenceDoc& doc,
                                      const Annotation& annotation) {
  std::vector<int> labels(doc.size(), 0);
  for (std::size_t i : annotation.selected_indices) {
    if (i >= doc.size()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "annotation index " + std::to_string(i) + " but " +
                      doc.episode_id + " has " + std::to_string(doc.size()) +
                      " sentences",
                  i);
    }
    labels[i] = 1;
  }
  return labels;
}

std::string CorpusRecordToJson(const CorpusRecord& r) {
  json sentences = json::array();
  for (const Sentence& s : r.doc.sentences) {
    sentences.push_back({{"index", s.index},
                         {"text", s.text},
                         {"start_s", ToSeconds(s.start)},
                         {"end_s", ToSeconds(s.end)}});
  }
  json provenance = "original";
  if (r.provenance.kind == Provenance::Kind::kAugmented) {
    provenance = {{"augmented_from", r.provenance.source_id},
                  {"seed", r.provenance.seed}};
  }
  const json out = {
      {"schema_version", kCorpusSchemaVersion},
      {"episode_id", r.doc.episode_id},
      {"series_id", r.series_id},
      {"title", r.title},
      {"description", r.description},
      {"audio_ref", r.doc.audio_ref},
      {"duration_s", ToSeconds(r.doc.duration)},
      {"sentences", std::move(sentences)},
      {"annotation",
       r.annotation ? AnnotationToJson(*r.annotation) : json(nullptr)},
      {"provenance", std::move(provenance)}};
  return out.dump();
}

CorpusRecord CorpusRecordFromJson(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string("corpus record is not JSON: ") + e.what());
  }
  const int version = j.value("schema_version", 1);
  if (version > kCorpusSchemaVersion) {
    throw Error(ErrorCode::kSchemaVersion,
                "record has schema_version " + std::to_string(version) +
                    ", this build reads up to " +
                    std::to_string(kCorpusSchemaVersion));
  }
  try {
    CorpusRecord r;
    r.doc.episode_id = j.at("episode_id").get<std::string>();
    r.series_id = j.value("series_id", "");
    r.title = j.value("title", "");
    r.description = j.value("description", "");
    r.doc.audio_ref = j.value("audio_ref", "");
    r.doc.duration = FromSeconds(j.value("duration_s", 0.0));
    for (const json& s : j.at("sentences")) {
      Sentence sentence;
      sentence.index = s.at("index").get<std::size_t>();
      sentence.text = s.at("text").get<std::string>();
      sentence.start = FromSeconds(s.at("start_s").get<double>());
      sentence.end = FromSeconds(s.at("end_s").get<double>());
      r.doc.sentences.push_back(std::move(sentence));
    }
    for (std::size_t i = 0; i < r.doc.size(); ++i) {
      if (r.doc.sentences[i].index != i) {
        throw Error(ErrorCode::kMalformedDocument,
                    "episode " + r.doc.episode_id +
                        ": sentence indices are not 0..m-1",
                    i);
      }
    }
    if (j.contains("annotation") && !j["annotation"].is_null()) {
      r.annotation = AnnotationFromJson(j["annotation"], r.doc.episode_id);
    }
    if (j.contains("provenance") && j["provenance"].is_object()) {
      r.provenance.kind = Provenance::Kind::kAugmented;
      r.provenance.source_id =
          j["provenance"].at("augmented_from").get<std::string>();
      r.provenance.seed = j["provenance"].value("seed", std::uint64_t{0});
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string("corpus record: ") + e.what());
  }
}

std::string SerializeCorpus(const Corpus& corpus) {
  RequireUniqueIds(corpus);
  std::vector<const CorpusRecord*> order;
  order.reserve(corpus.size());
  for (const CorpusRecord& r : corpus) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const CorpusRecord* a, const CorpusRecord* b) {
              return a->episode_id() < b->episode_id();
            });
  std::string out;
  for (const CorpusRecord* r : order) {
    out += CorpusRecordToJson(*r);
    out += '\n';
  }
  return out;
}

Corpus ParseCorpus(std::string_view text) {
  Corpus corpus;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      corpus.push_back(CorpusRecordFromJson(line));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " +
                                e.what());
    }
  }
  RequireUniqueIds(corpus);
  std::stable_sort(corpus.begin(), corpus.end(),
                   [](const CorpusRecord& a, const CorpusRecord& b) {
                     return a.episode_id() < b.episode_id();
                   });
  return corpus;
}

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  internal::WriteFileAtomically(path, SerializeCorpus(corpus));
}

Corpus LoadCorpus(const std::filesystem::path& path) {
  return ParseCorpus(internal::ReadFile(path));
}

std::string CurrentUtcTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

Datastore::Datastore(std::filesystem::path root) : root_(std::move(root)) {
  const auto corpus_path = root_ / kCorpusFile;
  if (std::filesystem::exists(corpus_path)) {
    for (CorpusRecord& r : LoadCorpus(corpus_path)) {
      std::string id = r.episode_id();
      records_.emplace(std::move(id), std::move(r));
    }
  } else {
    std::filesystem::create_directories(root_);
  }
}

std::vector<CorpusRecord> Datastore::Snapshot() const {
  std::shared_lock lock(corpus_mutex_);
  std::vector<CorpusRecord> out;
  out.reserve(records_.size());
  for (const auto& [id, r] : records_) out.push_back(r);
  return out;
}

std::optional<CorpusRecord> Datastore::Find(std::string_view episode_id) const {
  std::shared_lock lock(corpus_mutex_);
  if (auto it = records_.find(episode_id); it != records_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::filesystem::path Datastore::AudioPath(const CorpusRecord& record) const {
  std::filesystem::path ref(record.doc.audio_ref);
  return ref.is_absolute() ? ref : root_ / ref;
}

std::mutex& Datastore::EpisodeLock(const std::string& episode_id) {
  std::lock_guard guard(locks_mutex_);
  auto& slot = episode_locks_[episode_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

int Datastore::CommitAnnotation(std::string_view episode_id,
                                std::vector<std::size_t> indices,
                                std::string annotator_id) {
  const std::string id(episode_id);
  std::lock_guard episode_guard(EpisodeLock(id));

  std::optional<CorpusRecord> record = Find(id);
  if (!record) {
    throw Error(ErrorCode::kNotFound, "no episode '" + id + "'");
  }
  Annotation annotation;
  annotation.episode_id = id;
  annotation.selected_indices = std::move(indices);
  annotation.annotator_id = std::move(annotator_id);
  annotation.created_at = CurrentUtcTimestamp();
  annotation.revision =
      record->annotation ? record->annotation->revision + 1 : 1;
  ValidateAnnotation(record->doc, annotation);

  std::lock_guard file_guard(file_mutex_);
  {
    json line = AnnotationToJson(annotation);
    line["episode_id"] = id;
    std::ofstream history(root_ / kHistoryFile, std::ios::app);
    if (!history) throw Error(ErrorCode::kIo, "cannot append history");
    history << line.dump() << '\n';
  }
  {
    std::unique_lock lock(corpus_mutex_);
    records_.at(id).annotation = annotation;
  }
  PersistLocked();
  return annotation.revision;
}

std::vector<Annotation> Datastore::History(std::string_view episode_id) const {
  std::vector<Annotation> out;
  std::lock_guard file_guard(file_mutex_);
  const auto path = root_ / kHistoryFile;
  if (!std::filesystem::exists(path)) return out;
  std::istringstream in(internal::ReadFile(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.value("episode_id", "") != episode_id) continue;
    out.push_back(AnnotationFromJson(j, std::string(episode_id)));
  }
  return out;
}

void Datastore::PersistLocked() const {
  Corpus corpus = Snapshot();
  internal::WriteFileAtomically(root_ / kCorpusFile, SerializeCorpus(corpus));
}

}  // namespace castdigest
