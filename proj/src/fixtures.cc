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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "castdigest/datastore.h"
#include "castdigest/error.h"
#include "rng_util.h"

namespace castdigest {
namespace {

using internal::UniformBelow;
using internal::UniformUnit;

constexpr int kMaxSelectedMean = 60;
constexpr std::size_t kTopicWordsPerEpisode = 8;
constexpr const char* kAnnotatorId = "fixture";
constexpr const char* kAnnotationTime = "2020-01-30T19:30:00Z";

const std::vector<std::string>& Syllables() {
  static const std::vector<std::string> s = {
      "ka", "lo", "mi", "ra", "te", "su", "no", "vi", "de", "po",
      "za", "ne", "ri", "ba", "to", "fe", "gu", "la", "mo", "si",
      "ven", "dor", "pal", "tik", "sam", "rul", "gor", "bin"};
  return s;
}

const std::vector<std::string>& FunctionWords() {
  static const std::vector<std::string> w = {
      "the", "and", "a",   "to",   "of",  "so",   "we",   "you",
      "it",  "is",  "that", "in",  "was", "like", "just", "they",
      "but", "what", "really", "think", "know", "about"};
  return w;
}

// Pseudo-words keep the synthetic vocabulary free of accidental overlap with
// the function words.
std::string MakeWord(std::mt19937_64& rng) {
  const auto& syl = Syllables();
  const std::size_t parts = 2 + UniformBelow(rng, 2);
  std::string word;
  for (std::size_t i = 0; i < parts; ++i) word += syl[UniformBelow(rng, syl.size())];
  return word;
}

std::vector<std::string> MakeVocabulary(std::mt19937_64& rng, std::size_t n,
                                        std::set<std::string>& taken) {
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w = MakeWord(rng);
    if (taken.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

double Normal(std::mt19937_64& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  const double u1 = 1.0 - UniformUnit(rng);  // (0, 1]
  const double u2 = UniformUnit(rng);
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::string> Split(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t next = text.find(' ', pos);
    const std::size_t end = next == std::string::npos ? text.size() : next;
    if (end > pos) out.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

// A sentence before it is placed on the timeline.
struct PlannedSentence {
  std::vector<std::string> words;
  std::vector<Millis> word_durations;
  std::string final_mark = ".";
  bool topical = false;

  Millis spoken() const {
    Millis total{0};
    for (Millis d : word_durations) total += d;
    // Inter-word gaps are fixed at 60 ms.
    if (!words.empty()) total += Millis(60) * (words.size() - 1);
    return total;
  }
};

PlannedSentence Plan(std::vector<std::string> words, std::mt19937_64& rng,
                     bool topical) {
  PlannedSentence p;
  p.topical = topical;
  for (std::size_t i = 0; i < words.size(); ++i) {
    p.word_durations.push_back(Millis(220 + UniformBelow(rng, 230)));
  }
  p.words = std::move(words);
  if (UniformBelow(rng, 10) == 0) p.final_mark = "?";
  return p;
}

struct EpisodeVocab {
  const std::vector<std::string>* filler;
  std::vector<std::string> topic;
};

std::vector<std::string> ChatterWords(std::mt19937_64& rng,
                                      const EpisodeVocab& v,
                                      double topic_rate) {
  const std::size_t n = 6 + UniformBelow(rng, 7);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = UniformUnit(rng);
    if (r < topic_rate) {
      out.push_back(v.topic[UniformBelow(rng, v.topic.size())]);
    } else if (r < topic_rate + 0.35) {
      const auto& fw = FunctionWords();
      out.push_back(fw[UniformBelow(rng, fw.size())]);
    } else {
      out.push_back((*v.filler)[UniformBelow(rng, v.filler->size())]);
    }
  }
  return out;
}

}  // namespace

std::vector<FixtureEpisode> GenerateFixtureCorpus(const FixtureParams& params,
                                                  std::uint64_t seed) {
  if (params.n_series < 1 || params.episodes_per_series_mean < 1.0 ||
      params.episodes_per_series_sd < 0.0 || params.selected_sd < 0.0 ||
      params.sample_rate < 1000) {
    throw Error(ErrorCode::kInfeasible, "fixture parameters out of range");
  }
  if (params.selected_mean < 1.0 || params.selected_mean > kMaxSelectedMean) {
    throw Error(ErrorCode::kInfeasible,
                "selected_mean must lie in [1, " +
                    std::to_string(kMaxSelectedMean) +
                    "]: episodes cannot hold that many summary sentences");
  }

  std::mt19937_64 rng(internal::SplitMix64(seed));
  std::set<std::string> taken;
  const std::vector<std::string> filler = MakeVocabulary(rng, 180, taken);
  const std::vector<std::string> sponsors = MakeVocabulary(rng, 3, taken);

  std::vector<FixtureEpisode> out;
  for (int s = 0; s < params.n_series; ++s) {
    const std::string series_name = MakeVocabulary(rng, 1, taken)[0];
    const std::string host = MakeVocabulary(rng, 1, taken)[0];
    char series_id[16];
    std::snprintf(series_id, sizeof(series_id), "s%02d", s);
    const std::vector<std::string> intro = {
        "hey there welcome to the " + series_name + " podcast",
        "i am " + host + " and this is " + series_name,
        "on " + series_name + " we dig into the stories behind the news",
        series_name + " is made possible by listeners like you",
        "okay here is the show on " + series_name,
    };

    const long drawn = std::lround(Normal(rng, params.episodes_per_series_mean,
                                          params.episodes_per_series_sd));
    const int n_episodes = static_cast<int>(std::max(1L, drawn));
    for (int e = 0; e < n_episodes; ++e) {
      EpisodeVocab vocab{&filler, MakeVocabulary(rng, kTopicWordsPerEpisode,
                                                 taken)};
      std::vector<PlannedSentence> plan;
      for (const std::string& line : intro) {
        plan.push_back(Plan(Split(line), rng, false));
      }
      const std::size_t opening = 1 + UniformBelow(rng, 4);
      for (std::size_t i = 0; i < opening; ++i) {
        plan.push_back(Plan(ChatterWords(rng, vocab, 0.02), rng, false));
      }

      // Summary block: topical sentences whose total duration is brought into
      // the committable range.
      const long want = std::lround(
          Normal(rng, params.selected_mean, params.selected_sd));
      const std::size_t block_size = static_cast<std::size_t>(
          std::clamp(want, 2L, static_cast<long>(2 * kMaxSelectedMean)));
      std::vector<PlannedSentence> block;
      Millis block_time{0};
      const auto add_topical = [&] {
        block.push_back(Plan(ChatterWords(rng, vocab, 0.5), rng, true));
        block_time += block.back().spoken();
      };
      for (std::size_t i = 0; i < block_size; ++i) add_topical();
      while (block_time < kMinSummaryDuration) add_topical();
      while (block_time > kMaxSummaryDuration) {
        block_time -= block.back().spoken();
        block.pop_back();
      }
      const std::size_t block_first = plan.size();
      for (auto& p : block) plan.push_back(std::move(p));
      const std::size_t block_last = plan.size() - 1;

      const std::size_t rest = 12 + UniformBelow(rng, 25);
      const bool has_ad = UniformBelow(rng, 5) < 2;
      const std::size_t ad_at = has_ad ? UniformBelow(rng, rest) : rest + 1;
      for (std::size_t i = 0; i < rest; ++i) {
        if (i == ad_at) {
          const std::string& sp = sponsors[UniformBelow(rng, sponsors.size())];
          for (const std::string& line :
               {"this episode is brought to you by " + sp,
                sp + " makes it easy to get started today",
                "visit " + sp + " dot com slash podcast to learn more"}) {
            plan.push_back(Plan(Split(line), rng, false));
          }
        }
        plan.push_back(Plan(ChatterWords(rng, vocab, 0.03), rng, false));
      }

      // Lay everything out on the timeline.
      FixtureEpisode episode;
      char episode_id[40];
      std::snprintf(episode_id, sizeof(episode_id), "%s-e%03d", series_id, e);
      Transcript& t = episode.transcript;
      t.episode_id = episode_id;
      t.audio_ref = std::string("audio/") + episode_id + ".wav";
      Millis clock{500};
      for (std::size_t i = 0; i < plan.size(); ++i) {
        const PlannedSentence& p = plan[i];
        for (std::size_t w = 0; w < p.words.size(); ++w) {
          if (w > 0) clock += Millis(60);
          WordToken token;
          token.content = p.words[w];
          token.start = clock;
          clock += p.word_durations[w];
          token.end = clock;
          token.confidence =
              static_cast<double>(900 + UniformBelow(rng, 100)) / 1000.0;
          t.tokens.push_back(std::move(token));
        }
        WordToken mark;
        mark.kind = TokenKind::kPunctuation;
        mark.content = p.final_mark;
        mark.confidence = 0.99;
        t.tokens.push_back(std::move(mark));
        // A music sting after the intro, otherwise a short breath.
        clock += (i + 1 == intro.size()) ? Millis(3000)
                                         : Millis(200 + UniformBelow(rng, 500));
      }
      // The recording ends with the last word.
      for (auto it = t.tokens.rbegin(); it != t.tokens.rend(); ++it) {
        if (it->is_pronunciation()) {
          t.duration = *it->end;
          break;
        }
      }

      CorpusRecord& r = episode.record;
      r.doc = Segment(t);
      r.series_id = series_id;
      r.title = series_name + " episode " + std::to_string(e + 1);
      r.description = "This week on " + series_name + ": " +
                      vocab.topic[0] + ", " + vocab.topic[1] + " and " +
                      vocab.topic[2] + ".";
      Annotation a;
      a.episode_id = t.episode_id;
      for (std::size_t i = block_first; i <= block_last; ++i) {
        a.selected_indices.push_back(i);
      }
      a.annotator_id = kAnnotatorId;
      a.created_at = kAnnotationTime;
      a.revision = 1;
      ValidateAnnotation(r.doc, a);
      r.annotation = std::move(a);
      out.push_back(std::move(episode));
    }
  }
  return out;
}

AudioClip RenderFixtureAudio(const Transcript& transcript, int sample_rate) {
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.channels = 1;
  clip.samples.assign(FrameAt(transcript.duration, sample_rate), 0);
  for (const WordToken& token : transcript.tokens) {
    if (!token.is_pronunciation()) continue;
    const std::size_t begin = FrameAt(*token.start, sample_rate);
    const std::size_t end =
        std::min(FrameAt(*token.end, sample_rate), clip.samples.size());
    const double freq =
        180.0 + static_cast<double>(internal::StableHash(token.content) % 600);
    const std::size_t ramp = static_cast<std::size_t>(sample_rate / 200);
    for (std::size_t f = begin; f < end; ++f) {
      const std::size_t edge = std::min(f - begin, end - 1 - f);
      const double gain =
          edge < ramp ? static_cast<double>(edge) / static_cast<double>(ramp)
                      : 1.0;
      const double phase = 2.0 * std::numbers::pi * freq *
                           static_cast<double>(f - begin) / sample_rate;
      clip.samples[f] =
          static_cast<std::int16_t>(std::lround(9000.0 * gain * std::sin(phase)));
    }
  }
  return clip;
}

void WriteFixtureDataset(std::span<const FixtureEpisode> episodes,
                         const std::filesystem::path& root, bool with_audio,
                         int sample_rate) {
  std::filesystem::create_directories(root / "transcripts");
  if (with_audio) std::filesystem::create_directories(root / "audio");
  Corpus corpus;
  corpus.reserve(episodes.size());
  for (const FixtureEpisode& e : episodes) {
    corpus.push_back(e.record);
    std::ofstream t(root / "transcripts" / (e.record.episode_id() + ".json"),
                    std::ios::binary | std::ios::trunc);
    t << SerializeTranscript(e.transcript);
    if (!t) throw Error(ErrorCode::kIo, "cannot write transcript");
    if (with_audio) {
      WriteWav(RenderFixtureAudio(e.transcript, sample_rate),
               root / e.record.doc.audio_ref);
    }
  }
  SaveCorpus(corpus, root / Datastore::kCorpusFile);
}

}  // namespace castdigest
