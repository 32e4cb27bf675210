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

// Python module _castdigest. Documents cross the boundary as corpus-record
// JSON strings; the castdigest package wraps them in dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "castdigest/audio.h"
#include "castdigest/cli.h"
#include "castdigest/datastore.h"
#include "castdigest/dedup_augment.h"
#include "castdigest/error.h"
#include "castdigest/eval.h"
#include "castdigest/segmenter.h"
#include "castdigest/summarizer.h"
#include "castdigest/transcript.h"

namespace py = pybind11;

namespace castdigest {
namespace {

using Samples = py::array_t<std::int16_t, py::array::c_style>;
using RunPair = std::pair<std::size_t, std::size_t>;

CorpusRecord Record(const std::string& json) {
  return CorpusRecordFromJson(json);
}

std::string RecordJson(SentenceDoc doc) {
  CorpusRecord r;
  r.doc = std::move(doc);
  return CorpusRecordToJson(r);
}

std::vector<IndexRun> Runs(const std::vector<RunPair>& pairs) {
  std::vector<IndexRun> runs;
  for (const auto& [first, last] : pairs) runs.push_back({first, last});
  return runs;
}

std::vector<RunPair> Pairs(const std::vector<IndexRun>& runs) {
  std::vector<RunPair> out;
  for (const IndexRun& r : runs) out.emplace_back(r.first, r.last);
  return out;
}

py::dict ScoreDict(const RougeScore& s) {
  py::dict d;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f1"] = s.f1;
  return d;
}

py::dict CountsDict(const RougeCounts& c, const RougeScore& s) {
  py::dict d = ScoreDict(s);
  d["overlap"] = c.overlap;
  d["candidate_total"] = c.candidate_total;
  d["reference_total"] = c.reference_total;
  return d;
}

py::dict ReportDict(const RougeReport& r) {
  py::dict d;
  d["rouge1"] = ScoreDict(r.rouge1);
  d["rouge2"] = ScoreDict(r.rouge2);
  d["rougeL"] = ScoreDict(r.rougeL);
  return d;
}

AudioClip ClipFrom(const Samples& samples, int sample_rate) {
  if (samples.ndim() != 1 && samples.ndim() != 2) {
    throw Error(ErrorCode::kInvalidArgument, "samples must be 1-D or 2-D");
  }
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.channels = samples.ndim() == 2 ? static_cast<int>(samples.shape(1)) : 1;
  clip.samples.assign(samples.data(), samples.data() + samples.size());
  return clip;
}

Samples ToArray(const AudioClip& clip) {
  const auto frames = static_cast<py::ssize_t>(clip.frames());
  Samples out = clip.channels == 1
                    ? Samples({frames})
                    : Samples({frames, static_cast<py::ssize_t>(clip.channels)});
  if (!clip.samples.empty()) {
    std::memcpy(out.mutable_data(), clip.samples.data(),
                clip.samples.size() * sizeof(std::int16_t));
  }
  return out;
}

}  // namespace
}  // namespace castdigest

PYBIND11_MODULE(_castdigest, m) {
  using namespace castdigest;
  m.doc() = "Podcast summarization core";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object index = e.index() ? py::cast(*e.index()) : py::none();
      PyErr_SetObject(error.ptr(),
                      py::make_tuple(e.what(), std::string(ErrorCodeName(e.code())),
                                     index)
                          .ptr());
    }
  });

  m.attr("MIN_SUMMARY_SECONDS") = kMinSummaryDuration.count() / 1000.0;
  m.attr("MAX_SUMMARY_SECONDS") = kMaxSummaryDuration.count() / 1000.0;

  m.def(
      "parse_transcript",
      [](const std::string& raw, const std::string& episode_id,
         const std::string& audio_ref) {
        return SerializeTranscript(ParseTranscript(raw, episode_id, audio_ref));
      },
      py::arg("raw"), py::arg("episode_id") = "", py::arg("audio_ref") = "",
      "Normalises an ASR result document; returns transcript JSON.");

  m.def(
      "segment",
      [](const std::string& transcript_json, double pause_threshold_s,
         const std::string& episode_id, const std::string& audio_ref) {
        return RecordJson(
            Segment(ParseTranscript(transcript_json, episode_id, audio_ref),
                    pause_threshold_s));
      },
      py::arg("transcript_json"),
      py::arg("pause_threshold_s") = kDefaultPauseThresholdSeconds,
      py::arg("episode_id") = "", py::arg("audio_ref") = "");

  m.def(
      "lead_n",
      [](const std::string& record, std::size_t n) {
        return LeadN(Record(record).doc, n).indices;
      },
      py::arg("record"), py::arg("n"));

  m.def(
      "select_top_k",
      [](std::vector<double> scores, std::size_t k) {
        return SelectTopK({"", std::move(scores)}, k).indices;
      },
      py::arg("scores"), py::arg("k"));

  m.def(
      "reference_scores",
      [](const std::string& record, const std::vector<RunPair>& runs) {
        return ReferenceScores(Record(record).doc, Runs(runs)).scores;
      },
      py::arg("record"), py::arg("repetitive_runs") = std::vector<RunPair>{});

  m.def(
      "summarize",
      [](const std::string& record, const std::string& scorer, std::size_t k,
         std::size_t max_tokens, const std::vector<RunPair>& runs) {
        const CorpusRecord r = Record(record);
        if (scorer == "lead") {
          return Summarize(r.doc, LeadScorer(), k, max_tokens).indices;
        }
        if (scorer != "reference") {
          throw Error(ErrorCode::kInvalidArgument,
                      "scorer must be 'lead' or 'reference'");
        }
        const ReferenceScorer ref({{r.episode_id(), Runs(runs)}});
        return Summarize(r.doc, ref, k, max_tokens).indices;
      },
      py::arg("record"), py::arg("scorer") = "reference",
      py::arg("k") = kDefaultTopK, py::arg("max_tokens") = kDefaultMaxTokens,
      py::arg("repetitive_runs") = std::vector<RunPair>{});

  m.def("tokenize", [](const std::string& text) { return RougeTokenize(text); },
        py::arg("text"));

  m.def(
      "rouge_n",
      [](const std::vector<std::string>& candidate,
         const std::vector<std::string>& reference, std::size_t n) {
        return CountsDict(RougeNCounts(candidate, reference, n),
                          RougeN(candidate, reference, n));
      },
      py::arg("candidate"), py::arg("reference"), py::arg("n"));

  m.def(
      "rouge_l",
      [](const std::vector<std::string>& candidate,
         const std::vector<std::string>& reference) {
        return CountsDict(RougeLCounts(candidate, reference),
                          RougeL(candidate, reference));
      },
      py::arg("candidate"), py::arg("reference"));

  m.def(
      "score_texts",
      [](const std::string& candidate, const std::string& reference) {
        return ReportDict(ScoreTexts(candidate, reference));
      },
      py::arg("candidate"), py::arg("reference"));

  m.def(
      "merge_and_clean",
      [](const std::vector<std::size_t>& indices, std::size_t gap_tolerance,
         std::size_t min_run_len) {
        return Pairs(MergeAndClean(indices, gap_tolerance, min_run_len));
      },
      py::arg("indices"), py::arg("gap_tolerance") = kDefaultGapTolerance,
      py::arg("min_run_len") = kDefaultMinRunLength);

  m.def(
      "mine_repeats",
      [](const std::vector<std::string>& records) {
        std::vector<SentenceDoc> docs;
        for (const auto& r : records) docs.push_back(Record(r).doc);
        std::map<std::string, std::vector<RunPair>> out;
        for (const auto& [id, runs] :
             SegmentLibrary::Build(docs).RunsByEpisode()) {
          out[id] = Pairs(runs);
        }
        return out;
      },
      py::arg("records"), "Repetitive runs per episode id.");

  m.def(
      "build_augmented_dataset",
      [](const std::string& corpus_jsonl, std::size_t factor,
         std::uint64_t seed, std::size_t workers) {
        const Corpus corpus = ParseCorpus(corpus_jsonl);
        std::vector<SentenceDoc> docs;
        for (const auto& r : corpus) docs.push_back(r.doc);
        const SegmentLibrary library = SegmentLibrary::Build(docs);
        py::gil_scoped_release release;
        return SerializeCorpus(
            BuildAugmentedDataset(corpus, library, factor, seed, workers));
      },
      py::arg("corpus_jsonl"), py::arg("factor") = kDefaultAugmentationFactor,
      py::arg("seed") = 0, py::arg("workers") = 1);

  m.def(
      "kfold_split",
      [](std::vector<std::string> ids, std::size_t k, std::uint64_t seed) {
        std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
            out;
        for (Fold& f : KFoldSplit(std::move(ids), k, seed)) {
          out.emplace_back(std::move(f.train), std::move(f.test));
        }
        return out;
      },
      py::arg("ids"), py::arg("k") = kDefaultFolds, py::arg("seed") = 0);

  m.def(
      "summary_validity_reason",
      [](const std::string& record, const std::vector<std::size_t>& indices) {
        return SummaryValidityReason(Record(record).doc, indices);
      },
      py::arg("record"), py::arg("indices"));

  m.def(
      "stitch",
      [](const Samples& samples, int sample_rate,
         const std::vector<std::pair<double, double>>& spans_s,
         double crossfade_ms) {
        SpanList spans;
        for (const auto& [start, end] : spans_s) {
          spans.push_back({Millis(std::llround(start * 1000.0)),
                           Millis(std::llround(end * 1000.0))});
        }
        StitchOptions options;
        options.crossfade = Millis(std::llround(crossfade_ms));
        return ToArray(Stitch(ClipFrom(samples, sample_rate), spans, options));
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("spans"),
      py::arg("crossfade_ms") = 0.0,
      "Concatenates [start_s, end_s) spans of an int16 clip.");

  m.def(
      "selection_spans",
      [](const std::string& record, const std::vector<std::size_t>& indices) {
        const CorpusRecord r = Record(record);
        std::vector<std::pair<double, double>> out;
        for (const Span& s : SpansOf(r.doc, {r.episode_id(), indices, 0})) {
          out.emplace_back(s.start.count() / 1000.0, s.end.count() / 1000.0);
        }
        return out;
      },
      py::arg("record"), py::arg("indices"));

  m.def(
      "read_wav",
      [](const std::string& path) {
        const AudioClip clip = ReadWav(path);
        return std::make_tuple(ToArray(clip), clip.sample_rate);
      },
      py::arg("path"));

  m.def(
      "write_wav",
      [](const std::string& path, const Samples& samples, int sample_rate) {
        WriteWav(ClipFrom(samples, sample_rate), path);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = RunCli(args, out, err);
        }
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process.");
}
