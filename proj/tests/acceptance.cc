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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when any
// line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "castdigest/annotation_service.h"
#include "castdigest/audio.h"
#include "castdigest/cli.h"
#include "castdigest/datastore.h"
#include "castdigest/dedup_augment.h"
#include "castdigest/eval.h"
#include "castdigest/segmenter.h"
#include "castdigest/summarizer.h"
#include "httplib.h"
#include "json.hpp"
#include "oracles.h"

namespace castdigest {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Collects failure messages for one criterion.
class Check {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void Note(const std::string& text) {
    notes_ += (notes_.empty() ? "" : "; ") + text;
  }
  bool ok() const { return failed_ == 0; }
  std::string Summary() const {
    if (ok()) return notes_;
    std::string s = std::to_string(failed_) + " failure(s): ";
    for (std::size_t i = 0; i < failures_.size(); ++i) {
      s += (i ? " | " : "") + failures_[i];
    }
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
  std::string notes_;
};

std::string Fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

const std::vector<FixtureEpisode>& FixtureCorpus() {
  static const auto episodes = GenerateFixtureCorpus(FixtureParams{}, 3);
  return episodes;
}

Corpus FixtureRecords() {
  Corpus corpus;
  for (const auto& e : FixtureCorpus()) corpus.push_back(e.record);
  return corpus;
}

void RougeOracle(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240501);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cand = testing::RandomTokens(rng, 12, 2 + trial % 6);
    const auto ref = testing::RandomTokens(rng, 12, 2 + trial % 6);
    const auto compare = [&](const RougeCounts& got,
                             const testing::OracleCounts& want,
                             const RougeScore& score, const char* what) {
      const bool counts = got.overlap == want.overlap &&
                          got.candidate_total == want.candidate_total &&
                          got.reference_total == want.reference_total;
      c.Expect(counts, std::string(what) + " counts, case " +
                           std::to_string(trial));
      const double diff = std::abs(score.f1 - testing::OracleF(want));
      worst = std::max(worst, diff);
      c.Expect(diff <= 1e-12, std::string(what) + " F, case " +
                                  std::to_string(trial));
    };
    for (std::size_t n : {1, 2}) {
      compare(RougeNCounts(cand, ref, n), testing::OracleRougeN(cand, ref, n),
              RougeN(cand, ref, n), n == 1 ? "rouge1" : "rouge2");
    }
    compare(RougeLCounts(cand, ref), testing::OracleRougeL(cand, ref),
            RougeL(cand, ref), "rougeL");
  }
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  c.Expect(secs < 10.0, "runtime " + Fmt(secs, 2) + " s");
  char worst_text[32];
  std::snprintf(worst_text, sizeof(worst_text), "%.1e", worst);
  c.Note("1000 cases, max |dF| " + std::string(worst_text) + ", " +
         Fmt(secs, 2) + " s");
}

void MergeExample(Check& c) {
  const std::vector<std::size_t> indices = {0, 1, 2, 3, 4, 6, 7, 30, 31, 32, 48};
  const auto runs = MergeAndClean(indices);
  const std::vector<IndexRun> want = {{0, 7}, {30, 32}};
  c.Expect(runs == want, "unexpected runs");
  std::string shown;
  for (const auto& r : runs) {
    shown += "(" + std::to_string(r.first) + "," + std::to_string(r.last) + ")";
  }
  c.Note(shown);
}

Transcript Words(std::vector<WordToken> tokens) {
  Transcript t;
  t.episode_id = "golden";
  t.tokens = std::move(tokens);
  for (const auto& tok : t.tokens) {
    if (tok.end) t.duration = std::max(t.duration, *tok.end);
  }
  return t;
}

void SegmentationGoldens(Check& c) {
  using testing::Mark;
  using testing::Word;
  const SentenceDoc stop = Segment(
      Words({Word("Hello", 0.0, 0.4), Mark("."), Word("world", 0.8, 1.2)}));
  c.Expect(stop.size() == 2 && stop.sentences[0].text == "Hello." &&
               stop.sentences[1].text == "world" &&
               stop.sentences[0].end == Millis(400) &&
               stop.sentences[1].start == Millis(800),
           "punctuation break");
  const SentenceDoc gap =
      Segment(Words({Word("foo", 0.0, 1.0), Word("bar", 3.5, 4.0)}), 2.0);
  c.Expect(gap.size() == 2, "2.5 s gap break");
  const SentenceDoc exact =
      Segment(Words({Word("foo", 0.0, 1.0), Word("bar", 3.0, 4.0)}), 2.0);
  c.Expect(exact.size() == 1 && exact.sentences[0].text == "foo bar",
           "exact 2.0 s gap");

  std::mt19937_64 rng(77);
  const std::vector<double> thresholds = {4.0, 2.0, 1.0, 0.5, 0.25, 0.1};
  for (int trial = 0; trial < 200; ++trial) {
    const Transcript t = testing::RandomTranscript(rng, 5 + rng() % 60);
    std::size_t previous = 0;
    for (double th : thresholds) {
      const std::size_t n = Segment(t, th).size();
      c.Expect(n >= previous, "count fell at threshold " + Fmt(th, 2) +
                                  ", transcript " + std::to_string(trial));
      previous = n;
    }
  }
  c.Note("3 goldens, 200 transcripts x 6 thresholds");
}

void StitchAccuracy(Check& c) {
  const int rate = 8000;
  std::mt19937_64 rng(5);
  std::size_t clips = 0;
  std::size_t spans_checked = 0;
  for (std::size_t e = 0; e < FixtureCorpus().size(); e += 40) {
    const FixtureEpisode& ep = FixtureCorpus()[e];
    const AudioClip clip = RenderFixtureAudio(ep.transcript, rate);
    ++clips;
    const AudioClip same =
        Stitch(clip, {Span{Millis(0), ep.record.doc.duration}});
    c.Expect(same == clip, "identity span on " + ep.record.episode_id());

    std::vector<Selection> selections;
    if (ep.record.annotation) {
      selections.push_back({ep.record.episode_id(),
                            ep.record.annotation->selected_indices, 0});
    }
    for (int i = 0; i < 5; ++i) {
      Selection s{ep.record.episode_id(), {}, 0};
      for (std::size_t j = 0; j < ep.record.doc.size(); ++j) {
        if (rng() % 4 == 0) s.indices.push_back(j);
      }
      if (!s.indices.empty()) selections.push_back(std::move(s));
    }
    for (const Selection& s : selections) {
      const SpanList spans = SpansOf(ep.record.doc, s);
      const AudioClip out = Stitch(clip, spans);
      std::size_t pos = 0;
      for (const Span& span : spans) {
        const std::size_t b = FrameAt(span.start, rate);
        const std::size_t e2 = FrameAt(span.end, rate);
        const bool inside =
            e2 <= clip.frames() && pos + (e2 - b) <= out.frames();
        c.Expect(inside && std::equal(clip.samples.begin() + b,
                                      clip.samples.begin() + e2,
                                      out.samples.begin() + pos),
                 "samples differ in " + s.episode_id);
        pos += e2 - b;
        ++spans_checked;
      }
      c.Expect(out.frames() == pos, "frame count on " + s.episode_id);
    }
  }
  c.Note(std::to_string(clips) + " tone clips, " +
         std::to_string(spans_checked) + " spans");
}

std::vector<std::string> Texts(const SentenceDoc& doc,
                               const std::vector<std::size_t>& indices) {
  std::vector<std::string> out;
  for (std::size_t i : indices) out.push_back(doc.sentences.at(i).text);
  return out;
}

void AugmentationCardinality(Check& c) {
  Corpus annotated;
  for (const auto& r : FixtureRecords()) {
    if (r.annotation) annotated.push_back(r);
  }
  std::vector<SentenceDoc> docs;
  for (const auto& r : annotated) docs.push_back(r.doc);
  const SegmentLibrary library = SegmentLibrary::Build(docs);
  const std::size_t n = annotated.size();
  std::map<std::string, const CorpusRecord*> by_id;
  for (const auto& r : annotated) by_id[r.episode_id()] = &r;
  std::string sizes;
  for (std::size_t factor : {0, 5, 20}) {
    const Corpus out = BuildAugmentedDataset(annotated, library, factor, 11, 4);
    c.Expect(out.size() == n * (factor + 1),
             "factor " + std::to_string(factor) + " gave " +
                 std::to_string(out.size()));
    sizes += (sizes.empty() ? "" : ", ") + std::to_string(factor) + "->" +
             std::to_string(out.size());
    for (const CorpusRecord& r : out) {
      if (r.provenance.kind != Provenance::Kind::kAugmented) continue;
      const CorpusRecord& src = *by_id.at(r.provenance.source_id);
      c.Expect(r.annotation &&
                   Texts(r.doc, r.annotation->selected_indices) ==
                       Texts(src.doc, src.annotation->selected_indices),
               "label texts of " + r.episode_id());
    }
  }
  c.Note("n=" + std::to_string(n) + ": " + sizes);
}

void SelectionInvariance(Check& c) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<std::function<double(double)>> transforms = {
      [](double x) { return x * x * x; },
      [](double x) { return 0.1 + 0.8 * x; },
      [](double x) { return std::expm1(x) / std::expm1(1.0); }};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng() % 40;
    std::set<double> distinct;
    while (distinct.size() < m) distinct.insert(unit(rng));
    std::vector<double> values(distinct.begin(), distinct.end());
    std::shuffle(values.begin(), values.end(), rng);
    const std::size_t k = 1 + rng() % (m + 2);
    const SentenceScores base{"s", values};
    const Selection want = SelectTopK(base, k);
    for (std::size_t t = 0; t < transforms.size(); ++t) {
      SentenceScores mapped = base;
      for (double& v : mapped.scores) v = transforms[t](v);
      c.Expect(SelectTopK(mapped, k).indices == want.indices,
               "transform " + std::to_string(t) + ", vector " +
                   std::to_string(trial));
    }

    SentenceDoc doc = testing::TimedDoc("s", std::vector<double>(m, 1.0));
    std::vector<double> decreasing(values);
    std::sort(decreasing.begin(), decreasing.end(), std::greater<>());
    c.Expect(SelectTopK({"s", decreasing}, k).indices == LeadN(doc, k).indices,
             "lead vs decreasing scores, vector " + std::to_string(trial));
  }
  c.Note("100 vectors x 3 transforms");
}

void CrossvalDeterminism(Check& c) {
  const fs::path dir = testing::TempDir("acceptance_crossval");
  WriteFixtureDataset(FixtureCorpus(), dir, false, 8000);
  const std::string corpus = (dir / "corpus.jsonl").string();
  std::string outputs[2];
  for (int run = 0; run < 2; ++run) {
    std::ostringstream out, err;
    const int code = RunCli({"crossval", corpus, "--scorer", "reference",
                             "--seed", "13", "--workers", run ? "4" : "1"},
                            out, err);
    c.Expect(code == kExitOk, "crossval exit " + std::to_string(code) + ": " +
                                  err.str());
    outputs[run] = out.str();
  }
  c.Expect(!outputs[0].empty() && outputs[0] == outputs[1],
           "reports differ between runs");

  std::vector<std::string> ids;
  for (int i = 0; i < 309; ++i) ids.push_back("episode-" + std::to_string(i));
  const auto folds = KFoldSplit(ids, 5, 13);
  std::vector<std::size_t> sizes;
  std::multiset<std::string> seen;
  for (const Fold& f : folds) {
    sizes.push_back(f.test.size());
    seen.insert(f.test.begin(), f.test.end());
    c.Expect(f.train.size() + f.test.size() == 309, "train is not complement");
  }
  c.Expect(sizes == std::vector<std::size_t>{62, 62, 62, 62, 61},
           "fold sizes");
  c.Expect(seen == std::multiset<std::string>(ids.begin(), ids.end()),
           "folds do not partition the ids");

  // Fixture corpus folds as well.
  const Corpus records = FixtureRecords();
  std::vector<std::string> fixture_ids;
  for (const auto& r : records) fixture_ids.push_back(r.episode_id());
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const Fold& f : KFoldSplit(fixture_ids, 5, 13)) {
    lo = std::min(lo, f.test.size());
    hi = std::max(hi, f.test.size());
  }
  c.Expect(hi - lo <= 1, "fixture fold sizes differ by more than one");
  c.Note(std::to_string(outputs[0].size()) +
         " identical bytes; 309 ids -> 62,62,62,62,61");
}

void OrderingSanity(Check& c) {
  Corpus records = FixtureRecords();
  std::vector<SentenceDoc> docs;
  for (const auto& r : records) docs.push_back(r.doc);
  auto scorer = std::make_shared<ReferenceScorer>(
      SegmentLibrary::Build(docs).RunsByEpisode());
  const std::vector<SummarySystem> systems = {
      {"lead-5", [](const SentenceDoc& d) { return LeadN(d, 5); }},
      {"reference-k12", [scorer](const SentenceDoc& d) {
         return Summarize(d, *scorer, kDefaultTopK);
       }}};
  const ExperimentReport report = RunCrossValidation(records, systems, 5, 0, 4);
  const double lead = report.results[0].rouge1.f1.mean;
  const double ref = report.results[1].rouge1.f1.mean;
  c.Expect(ref > lead, "reference " + Fmt(ref) + " <= lead-5 " + Fmt(lead));
  c.Note("ROUGE-1 F reference-k12 " + Fmt(ref) + " > lead-5 " + Fmt(lead));
}

void AnnotationRoundTrip(Check& c) {
  const fs::path dir = testing::TempDir("acceptance_service");
  const int rate = 2000;
  CorpusRecord ep;
  ep.doc = testing::TimedDoc(
      "ep", {10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 5});
  ep.series_id = "s";
  SaveCorpus({ep}, dir / Datastore::kCorpusFile);
  fs::create_directories(dir / "audio");
  WriteWav(testing::RampClip(rate, 125 * rate), dir / "audio" / "ep.wav");

  json persisted;
  {
    Datastore store(dir);
    AnnotationServiceConfig config;
    config.port = 0;
    AnnotationService service(store, config);
    httplib::Client client("127.0.0.1", service.Start());
    const auto indices = [](std::size_t a, std::size_t b) {
      std::vector<std::size_t> v(b - a);
      std::iota(v.begin(), v.end(), a);
      return v;
    };
    const auto post = [&](const std::vector<std::size_t>& idx) {
      auto res = client.Post("/episodes/ep/preview",
                             json{{"indices", idx}}.dump(), "application/json");
      return res && res->status == 200 ? json::parse(res->body) : json();
    };
    const auto put = [&](const std::vector<std::size_t>& idx) {
      return client.Put("/episodes/ep/annotation",
                        json{{"indices", idx}, {"annotator_id", "a"}}.dump(),
                        "application/json");
    };

    const json p60 = post(indices(0, 6));
    c.Expect(p60.value("valid", false), "60 s preview not valid");
    auto audio = client.Get(p60.value("audio", std::string("/none")));
    c.Expect(audio && audio->status == 200 &&
                 DecodeWav(audio->body).frames() == 60u * rate,
             "60 s preview audio");
    auto res = put(indices(0, 6));
    c.Expect(res && res->status == 200 &&
                 json::parse(res->body)["revision"] == 1,
             "60 s commit is not revision 1");

    const json p10 = post({3});
    c.Expect(!p10.value("valid", true) &&
                 p10.value("validity_reason", "") == "below 30s minimum",
             "10 s preview");
    res = put({3});
    c.Expect(res && res->status == 422, "10 s commit accepted");
    const json p125 = post(indices(0, 13));
    c.Expect(!p125.value("valid", true) &&
                 p125.value("validity_reason", "") == "above 120s maximum",
             "125 s preview");
    res = put(indices(0, 13));
    c.Expect(res && res->status == 422, "125 s commit accepted");
    service.Stop();
  }
  {
    Datastore store(dir);
    AnnotationServiceConfig config;
    config.port = 0;
    AnnotationService service(store, config);
    httplib::Client client("127.0.0.1", service.Start());
    auto res = client.Get("/episodes/ep/annotation");
    c.Expect(res && res->status == 200, "reload lost the annotation");
    if (res && res->status == 200) persisted = json::parse(res->body);
    c.Expect(persisted.value("revision", 0) == 1 &&
                 persisted["indices"] == json({0, 1, 2, 3, 4, 5}),
             "reloaded revision");
  }
  c.Note("60 s valid rev 1; 10 s and 125 s rejected; reload ok");
}

struct Criterion {
  const char* name;
  void (*run)(Check&);
};

}  // namespace
}  // namespace castdigest

int main() {
  using castdigest::Check;
  const castdigest::Criterion criteria[] = {
      {"rouge-oracle-equivalence", castdigest::RougeOracle},
      {"merge-worked-example", castdigest::MergeExample},
      {"segmentation-goldens", castdigest::SegmentationGoldens},
      {"stitch-sample-accuracy", castdigest::StitchAccuracy},
      {"augmentation-cardinality-label-safety",
       castdigest::AugmentationCardinality},
      {"selection-invariance", castdigest::SelectionInvariance},
      {"crossval-determinism", castdigest::CrossvalDeterminism},
      {"ordering-reference-over-lead5", castdigest::OrderingSanity},
      {"annotation-round-trip (secondary)", castdigest::AnnotationRoundTrip},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.Expect(false, std::string("threw: ") + e.what());
    }
    std::cout << (check.ok() ? "PASS " : "FAIL ") << criterion.name << "  "
              << check.Summary() << std::endl;
    failed += check.ok() ? 0 : 1;
  }
  std::cout << std::size(criteria) - failed << "/" << std::size(criteria)
            << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
