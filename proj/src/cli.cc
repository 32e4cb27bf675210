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

#include "castdigest/cli.h"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "castdigest/annotation_service.h"
#include "castdigest/audio.h"
#include "castdigest/datastore.h"
#include "castdigest/dedup_augment.h"
#include "castdigest/error.h"
#include "castdigest/eval.h"
#include "castdigest/segmenter.h"
#include "castdigest/summarizer.h"
#include "castdigest/transcript.h"
#include "file_util.h"
#include "json.hpp"

namespace castdigest {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Results of one command: printed to `out`, or written to --out.
class Sink {
 public:
  Sink(std::ostream& out, std::string path) : out_(out), path_(std::move(path)) {}

  void Write(const std::string& text) {
    if (path_.empty()) {
      out_ << text;
      out_.flush();
      return;
    }
    const fs::path p(path_);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    internal::WriteFileAtomically(p, text);
  }

 private:
  std::ostream& out_;
  std::string path_;
};

void RequireFile(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::kIo, "no such file: " + path.string());
  }
}

// Corpus JSONL, or the sentence JSONL written by `segment --sentences`
// (one episode named after the file).
Corpus LoadDocuments(const fs::path& path) {
  RequireFile(path);
  const std::string text = internal::ReadFile(path);
  std::istringstream lines(text);
  std::string first;
  while (std::getline(lines, first) && first.find_first_not_of(" \t\r") ==
                                           std::string::npos) {
  }
  if (first.empty()) return {};
  json probe;
  try {
    probe = json::parse(first);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument,
                path.string() + ": line is not JSON: " + e.what());
  }
  if (probe.contains("sentences")) return ParseCorpus(text);
  if (!probe.contains("index") || !probe.contains("text")) {
    throw Error(ErrorCode::kMalformedDocument,
                path.string() + ": neither corpus records nor sentences");
  }
  CorpusRecord record;
  record.doc.episode_id = path.stem().string();
  record.doc.sentences = SentencesFromJsonl(text);
  if (!record.doc.empty()) record.doc.duration = record.doc.sentences.back().end;
  return {std::move(record)};
}

// Parses an ASR document, taking episode_id/audio_ref from the document
// when the caller has none.
Transcript TranscriptFromRaw(const std::string& raw, const std::string& where,
                             std::string episode_id, std::string audio_ref) {
  json meta;
  try {
    meta = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument, where + ": " + e.what());
  }
  if (!meta.is_object()) {
    throw Error(ErrorCode::kMalformedDocument, where + ": not a JSON object");
  }
  if (episode_id.empty()) episode_id = meta.value("episode_id", "");
  if (episode_id.empty()) episode_id = fs::path(where).stem().string();
  if (audio_ref.empty()) audio_ref = meta.value("audio_ref", "");
  return ParseTranscript(raw, std::move(episode_id), std::move(audio_ref));
}

fs::path AudioFor(const CorpusRecord& record, const fs::path& audio_root) {
  const fs::path ref(record.doc.audio_ref);
  if (ref.empty()) {
    throw Error(ErrorCode::kNotFound,
                "episode " + record.episode_id() + " has no audio_ref");
  }
  return ref.is_absolute() ? ref : audio_root / ref;
}

std::map<std::string, std::vector<IndexRun>> MinedRuns(const Corpus& corpus) {
  std::vector<SentenceDoc> docs;
  for (const auto& r : corpus) docs.push_back(r.doc);
  if (docs.size() < 2) return {};
  return SegmentLibrary::Build(docs).RunsByEpisode();
}

std::unique_ptr<Scorer> MakeScorer(const PipelineConfig& config,
                                   const Corpus& corpus) {
  if (config.scorer == "lead") return std::make_unique<LeadScorer>();
  if (config.scorer == "external") {
    return std::make_unique<ExternalScorer>(
        ScorerEndpoint{config.scorer_endpoint});
  }
  return std::make_unique<ReferenceScorer>(MinedRuns(corpus));
}

json SelectionToJson(const SentenceDoc& doc, const Selection& selection,
                     const std::string& scorer) {
  return {{"episode_id", selection.episode_id},
          {"indices", selection.indices},
          {"k", selection.k_requested},
          {"scorer", scorer},
          {"text", SelectionText(doc, selection.indices)}};
}

std::vector<Selection> LoadSelections(const fs::path& path) {
  RequireFile(path);
  std::vector<Selection> out;
  std::istringstream lines(internal::ReadFile(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("episode_id").get<std::string>(),
                     j.at("indices").get<std::vector<std::size_t>>(),
                     j.value("k", std::size_t{0})});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedDocument,
                  path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void StitchAll(const Corpus& corpus, const std::vector<Selection>& selections,
               const fs::path& audio_root, const fs::path& out_dir,
               Millis crossfade) {
  std::map<std::string, const CorpusRecord*> by_id;
  for (const auto& r : corpus) by_id[r.episode_id()] = &r;
  fs::create_directories(out_dir);
  for (const Selection& s : selections) {
    auto it = by_id.find(s.episode_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kNotFound,
                  "selection names unknown episode " + s.episode_id);
    }
    const CorpusRecord& record = *it->second;
    const AudioClip clip = ReadWav(AudioFor(record, audio_root));
    const AudioClip joined =
        Stitch(clip, SpansOf(record.doc, s), StitchOptions{crossfade});
    WriteWav(joined, out_dir / (s.episode_id + ".wav"));
  }
}

// Text of one summary line: a selection record or an annotated corpus
// record.
std::map<std::string, std::string> LoadSummaryTexts(const fs::path& path) {
  RequireFile(path);
  std::map<std::string, std::string> out;
  std::istringstream lines(internal::ReadFile(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(n);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kMalformedDocument, where + ": " + e.what());
    }
    std::string id;
    std::string text;
    if (j.contains("sentences")) {
      const CorpusRecord r = CorpusRecordFromJson(line);
      if (!r.annotation) {
        throw Error(ErrorCode::kMalformedDocument,
                    where + ": episode " + r.episode_id() +
                        " has no annotation");
      }
      id = r.episode_id();
      text = SelectionText(r.doc, r.annotation->selected_indices);
    } else if (j.contains("text") && j.contains("episode_id")) {
      id = j["episode_id"].get<std::string>();
      text = j["text"].get<std::string>();
    } else {
      throw Error(ErrorCode::kMalformedDocument,
                  where + ": expected a selection or corpus record");
    }
    if (!out.emplace(id, std::move(text)).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate " + id);
    }
  }
  return out;
}

json ScoreToJson(const RougeScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

json ReportToJson(const RougeReport& r) {
  return {{"rouge1", ScoreToJson(r.rouge1)},
          {"rouge2", ScoreToJson(r.rouge2)},
          {"rougeL", ScoreToJson(r.rougeL)}};
}

std::atomic<AnnotationService*> g_service{nullptr};

extern "C" void StopService(int) {
  if (AnnotationService* s = g_service.load()) s->Stop();
}

}  // namespace

void PipelineConfig::Validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (!(pause_threshold_s > 0.0)) fail("--pause-threshold must be positive");
  if (top_k == 0) fail("--k must be positive");
  if (max_tokens == 0) fail("--max-tokens must be positive");
  if (factor == 0) fail("--factor must be positive");
  if (k_folds < 2) fail("--k-folds must be at least 2");
  if (workers == 0) fail("--workers must be positive");
  if (scorer != "lead" && scorer != "reference" && scorer != "external") {
    fail("--scorer must be lead, reference or external");
  }
  if (scorer == "external" && scorer_endpoint.empty()) {
    fail("--scorer external needs --scorer-endpoint");
  }
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  PipelineConfig config;
  std::string out_path;

  CLI::App app{"Podcast summarization pipeline", "castdigest"};
  app.set_config("--config", "", "key=value settings file; flags win");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--pause-threshold", config.pause_threshold_s,
                 "silence (s) that ends a sentence")
      ->capture_default_str();
  app.add_option("--k", config.top_k, "sentences per summary")
      ->capture_default_str();
  app.add_option("--max-tokens", config.max_tokens,
                 "scorer input limit in words")
      ->capture_default_str();
  app.add_option("--scorer", config.scorer, "lead, reference or external")
      ->capture_default_str();
  app.add_option("--scorer-endpoint", config.scorer_endpoint,
                 "http://host:port[/prefix] or tcp://host:port");
  app.add_option("--factor", config.factor, "augmented copies per episode")
      ->capture_default_str();
  app.add_option("--k-folds", config.k_folds, "cross-validation folds")
      ->capture_default_str();
  app.add_option("--seed", config.seed, "random seed")->capture_default_str();
  app.add_option("--workers", config.workers, "worker threads")
      ->capture_default_str();
  app.add_option("--out", out_path, "output file (directory for audio)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "ASR result -> transcript JSON");
  std::string ingest_input;
  std::string episode_id;
  std::string audio_ref;
  std::string asr_endpoint;
  double asr_timeout_s = 600.0;
  ingest->add_option("input", ingest_input,
                     "ASR result file, or the audio ref with --asr-endpoint")
      ->required();
  ingest->add_option("--episode-id", episode_id, "defaults to the file stem");
  ingest->add_option("--audio-ref", audio_ref, "audio file of the episode");
  ingest->add_option("--asr-endpoint", asr_endpoint,
                     "transcribe through this service (credentials from " +
                         std::string(kAsrCredentialsEnv) + ")");
  ingest->add_option("--asr-timeout", asr_timeout_s, "seconds")
      ->capture_default_str();

  // segment
  auto* segment = app.add_subcommand("segment", "transcripts -> corpus JSONL");
  std::vector<std::string> transcripts;
  bool sentences_only = false;
  segment->add_option("transcripts", transcripts, "transcript JSON files")
      ->required();
  segment->add_flag("--sentences", sentences_only,
                    "write sentence lines for a single transcript");

  // summarize
  auto* summarize = app.add_subcommand("summarize", "documents -> selections");
  std::string docs_path;
  std::string emit_audio;
  std::string audio_root;
  double crossfade_ms = 0.0;
  summarize->add_option("documents", docs_path, "corpus or sentence JSONL")
      ->required();
  summarize->add_option("--emit-audio", emit_audio,
                        "also stitch each summary into this directory");
  summarize->add_option("--audio-root", audio_root,
                        "base for relative audio refs (default: input dir)");
  summarize->add_option("--crossfade-ms", crossfade_ms, "0 for hard cuts")
      ->capture_default_str();

  // stitch
  auto* stitch = app.add_subcommand("stitch", "selections -> WAV summaries");
  std::string selections_path;
  stitch->add_option("documents", docs_path, "corpus JSONL")->required();
  stitch->add_option("selections", selections_path, "selection JSONL")
      ->required();
  stitch->add_option("--audio-root", audio_root,
                     "base for relative audio refs (default: corpus dir)");
  stitch->add_option("--crossfade-ms", crossfade_ms, "0 for hard cuts")
      ->capture_default_str();

  // mine-repeats
  auto* mine = app.add_subcommand("mine-repeats",
                                  "corpus -> repetitive segment library");
  std::size_t gap_tolerance = kDefaultGapTolerance;
  std::size_t min_run = kDefaultMinRunLength;
  mine->add_option("documents", docs_path, "corpus JSONL")->required();
  mine->add_option("--gap-tolerance", gap_tolerance)->capture_default_str();
  mine->add_option("--min-run", min_run)->capture_default_str();

  // augment
  auto* augment = app.add_subcommand("augment", "corpus -> augmented corpus");
  std::string library_path;
  augment->add_option("documents", docs_path, "corpus JSONL")->required();
  augment->add_option("--library", library_path,
                      "segment library (mined from the corpus if absent)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "ROUGE of predictions");
  std::string pred_path;
  std::string ref_path;
  evaluate->add_option("predictions", pred_path,
                       "selection JSONL or annotated corpus")
      ->required();
  evaluate->add_option("references", ref_path,
                       "selection JSONL or annotated corpus")
      ->required();

  // crossval
  auto* crossval = app.add_subcommand("crossval", "k-fold ROUGE report");
  std::vector<std::size_t> lead_baselines = {5};
  std::string format = "json";
  std::string histogram_path;
  crossval->add_option("documents", docs_path, "annotated corpus JSONL")
      ->required();
  crossval->add_option("--lead", lead_baselines, "LEAD-n baseline rows")
      ->capture_default_str();
  crossval->add_option("--format", format, "json or table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  crossval->add_option("--histogram", histogram_path,
                       "write selected-index histogram CSV here");

  // fixtures
  auto* fixtures = app.add_subcommand("fixtures", "synthetic corpus directory");
  FixtureParams fixture_params;
  bool no_audio = false;
  fixtures->add_option("--series", fixture_params.n_series)
      ->capture_default_str();
  fixtures->add_option("--episodes-mean", fixture_params.episodes_per_series_mean)
      ->capture_default_str();
  fixtures->add_option("--sample-rate", fixture_params.sample_rate)
      ->capture_default_str();
  fixtures->add_flag("--no-audio", no_audio, "skip WAV rendering");

  // serve-annotation
  auto* serve = app.add_subcommand("serve-annotation",
                                   "annotation HTTP backend");
  std::string store_dir;
  AnnotationServiceConfig service_config;
  double preview_ttl_s = 600.0;
  serve->add_option("store", store_dir, "corpus directory")->required();
  serve->add_option("--host", service_config.host)->capture_default_str();
  serve->add_option("--port", service_config.port)->capture_default_str();
  serve->add_option("--preview-ttl", preview_ttl_s, "seconds")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  Sink sink(out, out_path);
  const auto root_for = [&](const std::string& docs) {
    if (!audio_root.empty()) return fs::path(audio_root);
    return fs::path(docs).parent_path();
  };

  try {
    config.Validate();

    if (*ingest) {
      const fs::path input(ingest_input);
      std::string raw;
      if (!asr_endpoint.empty()) {
        AsrServiceConfig asr;
        asr.endpoint = asr_endpoint;
        if (const char* c = std::getenv(kAsrCredentialsEnv)) asr.credentials = c;
        asr.timeout = Millis(static_cast<long long>(asr_timeout_s * 1000.0));
        raw = FetchTranscription(asr, ingest_input);
        if (audio_ref.empty()) audio_ref = ingest_input;
      } else {
        RequireFile(input);
        raw = internal::ReadFile(input);
      }
      sink.Write(SerializeTranscript(
          TranscriptFromRaw(raw, ingest_input, episode_id, audio_ref)));

    } else if (*segment) {
      if (sentences_only && transcripts.size() != 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    "--sentences takes exactly one transcript");
      }
      Corpus corpus;
      for (const std::string& file : transcripts) {
        const fs::path path(file);
        RequireFile(path);
        const Transcript t =
            TranscriptFromRaw(internal::ReadFile(path), file, "", "");
        CorpusRecord record;
        record.doc = Segment(t, config.pause_threshold_s);
        corpus.push_back(std::move(record));
      }
      sink.Write(sentences_only ? SentencesToJsonl(corpus.front().doc)
                                : SerializeCorpus(corpus));

    } else if (*summarize) {
      const Corpus corpus = LoadDocuments(docs_path);
      const auto scorer = MakeScorer(config, corpus);
      std::string lines;
      std::vector<Selection> selections;
      for (const CorpusRecord& r : corpus) {
        Selection s = Summarize(r.doc, *scorer, config.top_k, config.max_tokens);
        lines += SelectionToJson(r.doc, s, scorer->name()).dump() + "\n";
        selections.push_back(std::move(s));
      }
      sink.Write(lines);
      if (!emit_audio.empty()) {
        StitchAll(corpus, selections, root_for(docs_path), emit_audio,
                  Millis(static_cast<long long>(crossfade_ms)));
      }

    } else if (*stitch) {
      if (out_path.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "stitch needs --out <directory>");
      }
      StitchAll(LoadDocuments(docs_path), LoadSelections(selections_path),
                root_for(docs_path), out_path,
                Millis(static_cast<long long>(crossfade_ms)));

    } else if (*mine) {
      const Corpus corpus = LoadDocuments(docs_path);
      std::vector<SentenceDoc> docs;
      for (const auto& r : corpus) docs.push_back(r.doc);
      sink.Write(SegmentLibrary::Build(docs, gap_tolerance, min_run).ToJsonl());

    } else if (*augment) {
      const Corpus corpus = LoadDocuments(docs_path);
      SegmentLibrary library;
      if (!library_path.empty()) {
        RequireFile(library_path);
        library = SegmentLibrary::FromJsonl(internal::ReadFile(library_path));
      } else {
        std::vector<SentenceDoc> docs;
        for (const auto& r : corpus) docs.push_back(r.doc);
        library = SegmentLibrary::Build(docs);
      }
      std::vector<std::string> warnings;
      const Corpus augmented = BuildAugmentedDataset(
          corpus, library, config.factor, config.seed, config.workers,
          &warnings);
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      sink.Write(SerializeCorpus(augmented));

    } else if (*evaluate) {
      const auto predicted = LoadSummaryTexts(pred_path);
      const auto reference = LoadSummaryTexts(ref_path);
      json episodes = json::array();
      std::vector<RougeReport> reports;
      for (const auto& [id, text] : predicted) {
        auto it = reference.find(id);
        if (it == reference.end()) {
          throw Error(ErrorCode::kNotFound, "no reference for episode " + id);
        }
        reports.push_back(ScoreTexts(text, it->second));
        json row = ReportToJson(reports.back());
        row["episode_id"] = id;
        episodes.push_back(std::move(row));
      }
      if (reports.empty()) {
        throw Error(ErrorCode::kEmptyDocument, pred_path + " has no summaries");
      }
      json result = {{"episodes", std::move(episodes)},
                     {"count", reports.size()},
                     {"mean", ReportToJson(MeanReport(reports))}};
      sink.Write(result.dump(2) + "\n");

    } else if (*crossval) {
      const Corpus corpus = LoadDocuments(docs_path);
      Corpus originals;
      for (const auto& r : corpus) {
        if (r.provenance.kind == Provenance::Kind::kOriginal) {
          originals.push_back(r);
        }
      }
      std::shared_ptr<const Scorer> scorer = MakeScorer(config, originals);
      std::vector<SummarySystem> systems;
      for (std::size_t n : lead_baselines) {
        if (n == 0) throw Error(ErrorCode::kInvalidArgument, "--lead 0");
        systems.push_back({"lead-" + std::to_string(n),
                           [n](const SentenceDoc& d) { return LeadN(d, n); }});
      }
      const std::size_t k = config.top_k;
      const std::size_t max_tokens = config.max_tokens;
      systems.push_back({scorer->name() + "-k" + std::to_string(k),
                         [scorer, k, max_tokens](const SentenceDoc& d) {
                           return Summarize(d, *scorer, k, max_tokens);
                         }});
      const ExperimentReport report = RunCrossValidation(
          corpus, systems, config.k_folds, config.seed, config.workers);
      sink.Write(format == "table" ? ExperimentReportToTable(report)
                                   : ExperimentReportToJson(report) + "\n");
      if (!histogram_path.empty()) {
        Corpus annotated;
        std::vector<std::vector<std::size_t>> picks;
        for (const auto& r : corpus) {
          if (!r.annotation) continue;
          annotated.push_back(r);
          picks.push_back(systems.back().select(r.doc).indices);
        }
        internal::WriteFileAtomically(histogram_path,
                                      SelectedIndexHistogramCsv(annotated, picks));
      }

    } else if (*fixtures) {
      if (out_path.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "fixtures needs --out <directory>");
      }
      const auto episodes = GenerateFixtureCorpus(fixture_params, config.seed);
      WriteFixtureDataset(episodes, out_path, !no_audio,
                          fixture_params.sample_rate);
      err << "wrote " << episodes.size() << " episodes to " << out_path << "\n";

    } else if (*serve) {
      Datastore store(store_dir);
      service_config.preview_ttl =
          Millis(static_cast<long long>(preview_ttl_s * 1000.0));
      AnnotationService service(store, service_config);
      g_service = &service;
      std::signal(SIGINT, StopService);
      std::signal(SIGTERM, StopService);
      err << "serving " << store_dir << " on " << service_config.host << ":"
          << service_config.port << "\n";
      service.Run();
      g_service = nullptr;
    }
  } catch (const Error& e) {
    err << "castdigest: " << e.what() << "\n";
    return IsInputError(e.code()) ? kExitInputError : kExitProcessingError;
  } catch (const fs::filesystem_error& e) {
    err << "castdigest: " << e.what() << "\n";
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "castdigest: malformed JSON: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "castdigest: " << e.what() << "\n";
    return kExitProcessingError;
  }
  return kExitOk;
}

}  // namespace castdigest
