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

#include "castdigest/dedup_augment.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "castdigest/error.h"
#include "castdigest/text.h"
#include "json.hpp"
#include "parallel.h"
#include "rng_util.h"

namespace castdigest {
namespace {

using nlohmann::json;

bool IsAsciiPunct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) ||
         (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

bool IsAsciiSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool Intersects(std::span<const std::size_t> selected, const IndexRun& run) {
  return std::any_of(selected.begin(), selected.end(),
                     [&](std::size_t i) { return run.contains(i); });
}

}  // namespace

std::string NormalizeSentence(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (IsAsciiPunct(c)) continue;
    if (IsAsciiSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                  : static_cast<char>(c);
  }
  return out;
}

std::map<std::string, std::vector<std::size_t>> FindRepetitiveIndices(
    std::span<const SentenceDoc> corpus) {
  if (corpus.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "repeat mining needs at least two episodes");
  }
  // normalised text -> episodes containing it (by position in `corpus`)
  std::map<std::string, std::set<std::size_t>> owners;
  std::vector<std::vector<std::string>> normalized(corpus.size());
  for (std::size_t e = 0; e < corpus.size(); ++e) {
    for (const Sentence& s : corpus[e].sentences) {
      std::string key = NormalizeSentence(s.text);
      if (WhitespaceTokenCount(key) >= kMinRepeatTokens) {
        owners[key].insert(e);
      }
      normalized[e].push_back(std::move(key));
    }
  }
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t e = 0; e < corpus.size(); ++e) {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < normalized[e].size(); ++i) {
      auto it = owners.find(normalized[e][i]);
      if (it == owners.end()) continue;
      // Present in at least one episode other than e.
      if (it->second.size() > 1 || !it->second.contains(e)) hits.push_back(i);
    }
    if (!hits.empty()) {
      auto& slot = out[corpus[e].episode_id];
      slot.insert(slot.end(), hits.begin(), hits.end());
      std::sort(slot.begin(), slot.end());
      slot.erase(std::unique(slot.begin(), slot.end()), slot.end());
    }
  }
  return out;
}

std::vector<IndexRun> MergeAndClean(std::span<const std::size_t> indices,
                                    std::size_t gap_tolerance,
                                    std::size_t min_run_len) {
  std::vector<IndexRun> runs;
  for (std::size_t n = 0; n < indices.size(); ++n) {
    const std::size_t i = indices[n];
    if (n > 0 && i <= indices[n - 1]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "indices must be strictly ascending", n);
    }
    if (!runs.empty() && i - runs.back().last <= gap_tolerance + 1) {
      runs.back().last = i;
    } else {
      runs.push_back({i, i});
    }
  }
  std::erase_if(runs,
                [&](const IndexRun& r) { return r.length() < min_run_len; });
  return runs;
}

std::vector<std::string> RepetitiveRun::normalized_texts() const {
  std::vector<std::string> out;
  out.reserve(sentences.size());
  for (const Sentence& s : sentences) out.push_back(NormalizeSentence(s.text));
  return out;
}

SegmentLibrary::SegmentLibrary(std::vector<RepetitiveRun> runs)
    : runs_(std::move(runs)) {
  std::sort(runs_.begin(), runs_.end(),
            [](const RepetitiveRun& a, const RepetitiveRun& b) {
              if (a.episode_id != b.episode_id) {
                return a.episode_id < b.episode_id;
              }
              return a.run.first < b.run.first;
            });
}

SegmentLibrary SegmentLibrary::Build(std::span<const SentenceDoc> corpus,
                                     std::size_t gap_tolerance,
                                     std::size_t min_run_len) {
  const auto repeated = FindRepetitiveIndices(corpus);
  std::vector<RepetitiveRun> runs;
  for (const SentenceDoc& doc : corpus) {
    auto it = repeated.find(doc.episode_id);
    if (it == repeated.end()) continue;
    for (const IndexRun& r :
         MergeAndClean(it->second, gap_tolerance, min_run_len)) {
      RepetitiveRun run{doc.episode_id, r, {}};
      run.sentences.assign(doc.sentences.begin() + r.first,
                           doc.sentences.begin() + r.last + 1);
      runs.push_back(std::move(run));
    }
  }
  return SegmentLibrary(std::move(runs));
}

std::vector<IndexRun> SegmentLibrary::RunsFor(
    std::string_view episode_id) const {
  std::vector<IndexRun> out;
  for (const RepetitiveRun& r : runs_) {
    if (r.episode_id == episode_id) out.push_back(r.run);
  }
  return out;
}

std::map<std::string, std::vector<IndexRun>> SegmentLibrary::RunsByEpisode()
    const {
  std::map<std::string, std::vector<IndexRun>> out;
  for (const RepetitiveRun& r : runs_) out[r.episode_id].push_back(r.run);
  return out;
}

std::string SegmentLibrary::ToJsonl() const {
  std::string out;
  for (const RepetitiveRun& r : runs_) {
    json texts = json::array();
    json spans = json::array();
    for (const Sentence& s : r.sentences) {
      texts.push_back(s.text);
      spans.push_back({static_cast<double>(s.start.count()) / 1000.0,
                       static_cast<double>(s.end.count()) / 1000.0});
    }
    const json line = {{"episode_id", r.episode_id},
                       {"first", r.run.first},
                       {"last", r.run.last},
                       {"texts", std::move(texts)},
                       {"normalized_texts", r.normalized_texts()},
                       {"spans", std::move(spans)}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

SegmentLibrary SegmentLibrary::FromJsonl(std::string_view text) {
  std::vector<RepetitiveRun> runs;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      RepetitiveRun r;
      r.episode_id = j.at("episode_id").get<std::string>();
      r.run.first = j.at("first").get<std::size_t>();
      r.run.last = j.at("last").get<std::size_t>();
      const auto texts = j.at("texts").get<std::vector<std::string>>();
      if (r.run.last < r.run.first || texts.size() != r.run.length()) {
        throw Error(ErrorCode::kMalformedDocument,
                    "library line " + std::to_string(line_no) +
                        ": run bounds disagree with texts");
      }
      for (std::size_t k = 0; k < texts.size(); ++k) {
        Sentence s;
        s.index = r.run.first + k;
        s.text = texts[k];
        if (j.contains("spans")) {
          const auto& span = j["spans"].at(k);
          s.start = Millis(std::llround(span.at(0).get<double>() * 1000));
          s.end = Millis(std::llround(span.at(1).get<double>() * 1000));
        }
        r.sentences.push_back(std::move(s));
      }
      runs.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedDocument,
                  "library line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return SegmentLibrary(std::move(runs));
}

AugmentedEpisode AugmentEpisode(const SentenceDoc& doc,
                                std::span<const std::size_t> selected,
                                const SegmentLibrary& library,
                                std::uint64_t seed) {
  std::vector<const RepetitiveRun*> candidates;
  for (const RepetitiveRun& r : library.runs()) {
    if (r.episode_id != doc.episode_id && !r.sentences.empty()) {
      candidates.push_back(&r);
    }
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kEmptyLibrary,
                "no repetitive segment from another episode to inject into " +
                    doc.episode_id);
  }
  for (std::size_t i : selected) {
    if (i >= doc.size()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "selected index " + std::to_string(i) + " not in " +
                      doc.episode_id,
                  i);
    }
  }

  std::mt19937_64 rng(internal::SplitMix64(seed));
  const RepetitiveRun& segment =
      *candidates[internal::UniformBelow(rng, candidates.size())];

  AugmentedEpisode out;
  out.injected_from = segment.episode_id;

  // Own runs, earliest first.
  std::optional<IndexRun> target;
  for (const IndexRun& r : library.RunsFor(doc.episode_id)) {
    if (r.last < doc.size()) {
      target = r;
      break;
    }
  }
  if (target && Intersects(selected, *target)) {
    out.warning = doc.episode_id + ": selection overlaps repetitive run [" +
                  std::to_string(target->first) + ", " +
                  std::to_string(target->last) + "]; prepending instead";
    target.reset();
  }

  // Splice point and the slice of the original being removed.
  const std::size_t cut_first = target ? target->first : 0;
  const std::size_t cut_len = target ? target->length() : 0;
  const Millis anchor = target ? doc.sentences[cut_first].start : Millis(0);
  const Millis removed_end =
      target ? doc.sentences[target->last].end : Millis(0);
  const Millis segment_origin = segment.sentences.front().start;
  const Millis injected_end =
      anchor + (segment.sentences.back().end - segment_origin);
  const Millis time_shift = injected_end - removed_end;

  out.replaced = target.has_value();
  out.doc.episode_id = doc.episode_id;
  out.doc.audio_ref = doc.audio_ref;
  out.doc.duration = doc.duration + time_shift;
  out.doc.sentences.reserve(doc.size() - cut_len + segment.sentences.size());
  for (std::size_t i = 0; i < cut_first; ++i) {
    Sentence s = doc.sentences[i];
    s.token_begin = s.token_end = 0;
    out.doc.sentences.push_back(std::move(s));
  }
  for (const Sentence& injected : segment.sentences) {
    Sentence s;
    s.text = injected.text;
    s.start = anchor + (injected.start - segment_origin);
    s.end = anchor + (injected.end - segment_origin);
    out.doc.sentences.push_back(std::move(s));
  }
  for (std::size_t i = cut_first + cut_len; i < doc.size(); ++i) {
    Sentence s = doc.sentences[i];
    s.start += time_shift;
    s.end += time_shift;
    s.token_begin = s.token_end = 0;
    out.doc.sentences.push_back(std::move(s));
  }
  Reindex(out.doc);

  const std::ptrdiff_t index_shift =
      static_cast<std::ptrdiff_t>(segment.sentences.size()) -
      static_cast<std::ptrdiff_t>(cut_len);
  out.selected.reserve(selected.size());
  for (std::size_t i : selected) {
    out.selected.push_back(i < cut_first
                               ? i
                               : static_cast<std::size_t>(
                                     static_cast<std::ptrdiff_t>(i) +
                                     index_shift));
  }
  return out;
}

Corpus BuildAugmentedDataset(const Corpus& corpus,
                             const SegmentLibrary& library,
                             std::size_t factor, std::uint64_t seed,
                             std::size_t workers,
                             std::vector<std::string>* warnings) {
  std::vector<std::vector<CorpusRecord>> per_episode(corpus.size());
  std::vector<std::vector<std::string>> per_episode_warnings(corpus.size());
  internal::ParallelFor(corpus.size(), workers, [&](std::size_t e) {
    const CorpusRecord& original = corpus[e];
    auto& slot = per_episode[e];
    slot.reserve(factor + 1);
    slot.push_back(original);
    const std::vector<std::size_t> none;
    const std::vector<std::size_t>& selected =
        original.annotation ? original.annotation->selected_indices : none;
    for (std::size_t j = 0; j < factor; ++j) {
      const std::uint64_t variant_seed =
          internal::DeriveSeed(seed, original.episode_id(), j);
      AugmentedEpisode aug =
          AugmentEpisode(original.doc, selected, library, variant_seed);
      if (aug.warning) per_episode_warnings[e].push_back(*aug.warning);

      CorpusRecord record;
      record.doc = std::move(aug.doc);
      record.doc.episode_id =
          original.episode_id() + "#aug" + std::to_string(j);
      record.series_id = original.series_id;
      record.title = original.title;
      record.description = original.description;
      if (original.annotation) {
        Annotation a = *original.annotation;
        a.episode_id = record.doc.episode_id;
        a.selected_indices = std::move(aug.selected);
        record.annotation = std::move(a);
      }
      record.provenance = {Provenance::Kind::kAugmented, original.episode_id(),
                           variant_seed};
      slot.push_back(std::move(record));
    }
  });

  Corpus out;
  out.reserve(corpus.size() * (factor + 1));
  for (std::size_t e = 0; e < corpus.size(); ++e) {
    for (auto& r : per_episode[e]) out.push_back(std::move(r));
    if (warnings) {
      warnings->insert(warnings->end(), per_episode_warnings[e].begin(),
                       per_episode_warnings[e].end());
    }
  }
  return out;
}

}  // namespace castdigest
