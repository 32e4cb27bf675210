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

#include "castdigest/annotation_service.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "castdigest/audio.h"
#include "castdigest/error.h"
#include "castdigest/eval.h"
#include "httplib.h"
#include "json.hpp"
#include "rng_util.h"

namespace castdigest {
namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";
constexpr const char* kWav = "audio/wav";

double Seconds(Millis t) { return static_cast<double>(t.count()) / 1000.0; }

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void SendError(httplib::Response& res, int status, const std::string& what) {
  SendJson(res, status, {{"error", what}});
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kValidation: return 422;
    case ErrorCode::kIndexOutOfRange:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMalformedDocument: return 400;
    default: return 500;
  }
}

// Runs a handler body, turning exceptions into JSON error responses.
template <typename Fn>
void Guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    SendError(res, StatusFor(e.code()), e.what());
  } catch (const json::exception& e) {
    SendError(res, 400, std::string("bad request body: ") + e.what());
  } catch (const std::exception& e) {
    SendError(res, 500, e.what());
  }
}

std::vector<std::size_t> ParseIndices(const json& body) {
  if (!body.contains("indices") || !body["indices"].is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "body needs an indices array");
  }
  std::vector<std::size_t> out;
  for (const json& v : body["indices"]) {
    if (!v.is_number_unsigned()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "indices must be non-negative integers");
    }
    out.push_back(v.get<std::size_t>());
  }
  for (std::size_t n = 1; n < out.size(); ++n) {
    if (out[n] <= out[n - 1]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "indices must be strictly ascending", n);
    }
  }
  return out;
}

std::size_t ParseCount(const std::string& text, const char* what) {
  std::size_t value = 0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must be a non-negative integer");
  }
  return value;
}

json EpisodeEntry(const CorpusRecord& r) {
  return {{"episode_id", r.episode_id()},
          {"series_id", r.series_id},
          {"title", r.title},
          {"description", r.description},
          {"duration_s", Seconds(r.doc.duration)},
          {"annotated", r.annotation.has_value()}};
}

json AnnotationJson(const SentenceDoc& doc, const Annotation& a) {
  return {{"episode_id", a.episode_id},
          {"summary_duration_s",
           Seconds(SummaryDuration(doc, a.selected_indices))},
          {"indices", a.selected_indices},
          {"annotator_id", a.annotator_id},
          {"created_at", a.created_at},
          {"revision", a.revision}};
}

std::string ReadWholeFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "no audio at " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

AnnotationService::AnnotationService(Datastore& store,
                                     AnnotationServiceConfig config)
    : store_(store),
      config_(std::move(config)),
      server_(std::make_unique<httplib::Server>()),
      stitch_slots_(static_cast<std::ptrdiff_t>(
          std::clamp<std::size_t>(config_.preview_workers, 1, 1024))) {
  Routes();
}

AnnotationService::~AnnotationService() { Stop(); }

int AnnotationService::Start() {
  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.host);
  } else if (!server_->bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(ErrorCode::kNetwork, "cannot bind " + config_.host + ":" +
                                         std::to_string(config_.port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void AnnotationService::Run() {
  if (!server_->listen(config_.host, config_.port)) {
    throw Error(ErrorCode::kNetwork, "cannot listen on " + config_.host +
                                         ":" + std::to_string(config_.port));
  }
}

void AnnotationService::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void AnnotationService::EvictExpiredLocked(
    std::chrono::steady_clock::time_point now) {
  std::erase_if(previews_,
                [&](const auto& entry) { return entry.second.expires <= now; });
}

PreviewResponse AnnotationService::Preview(
    const std::string& episode_id, const std::vector<std::size_t>& indices) {
  const std::optional<CorpusRecord> record = store_.Find(episode_id);
  if (!record) {
    throw Error(ErrorCode::kNotFound, "no episode '" + episode_id + "'");
  }
  PreviewResponse out;
  out.summary_text = SelectionText(record->doc, indices);
  out.total_duration_s = Seconds(SummaryDuration(record->doc, indices));
  out.validity_reason = SummaryValidityReason(record->doc, indices);
  out.valid = out.validity_reason.empty();
  if (indices.empty()) return out;

  const Selection selection{episode_id, indices, indices.size()};
  std::string wav;
  {
    stitch_slots_.acquire();
    struct Release {
      std::counting_semaphore<1024>& slots;
      ~Release() { slots.release(); }
    } release{stitch_slots_};
    const AudioClip clip = ReadWav(store_.AudioPath(*record));
    wav = EncodeWav(Stitch(clip, SpansOf(record->doc, selection)));
  }

  const auto now = std::chrono::steady_clock::now();
  std::lock_guard lock(previews_mutex_);
  EvictExpiredLocked(now);
  const std::uint64_t id = internal::SplitMix64(
      ++preview_counter_ ^
      static_cast<std::uint64_t>(now.time_since_epoch().count()));
  char token[24];
  std::snprintf(token, sizeof(token), "%016llx",
                static_cast<unsigned long long>(id));
  previews_[token] = {std::move(wav), now + config_.preview_ttl};
  out.audio_token = token;
  return out;
}

std::optional<std::string> AnnotationService::PreviewAudio(
    const std::string& token) {
  std::lock_guard lock(previews_mutex_);
  EvictExpiredLocked(std::chrono::steady_clock::now());
  if (auto it = previews_.find(token); it != previews_.end()) {
    return it->second.wav;
  }
  return std::nullopt;
}

void AnnotationService::Routes() {
  httplib::Server& srv = *server_;

  srv.Get("/episodes", [this](const httplib::Request& req,
                              httplib::Response& res) {
    Guarded(res, [&] {
      std::size_t limit = config_.page_size;
      if (req.has_param("limit")) {
        limit = std::clamp<std::size_t>(
            ParseCount(req.get_param_value("limit"), "limit"), 1, 1000);
      }
      const std::string cursor =
          req.has_param("cursor") ? req.get_param_value("cursor") : "";
      // Snapshot() is ordered by episode_id, which makes ids usable cursors.
      json page = json::array();
      std::optional<std::string> next;
      for (const CorpusRecord& r : store_.Snapshot()) {
        if (!cursor.empty() && r.episode_id() <= cursor) continue;
        if (page.size() == limit) {
          next = page.back()["episode_id"].get<std::string>();
          break;
        }
        page.push_back(EpisodeEntry(r));
      }
      SendJson(res, 200,
               {{"episodes", std::move(page)},
                {"next_cursor", next ? json(*next) : json(nullptr)}});
    });
  });

  srv.Get("/episodes/:id", [this](const httplib::Request& req,
                                  httplib::Response& res) {
    Guarded(res, [&] {
      const auto record = store_.Find(req.path_params.at("id"));
      if (!record) throw Error(ErrorCode::kNotFound, "unknown episode");
      json body = EpisodeEntry(*record);
      body["sentence_count"] = record->doc.size();
      SendJson(res, 200, body);
    });
  });

  srv.Get("/episodes/:id/audio", [this](const httplib::Request& req,
                                        httplib::Response& res) {
    Guarded(res, [&] {
      const auto record = store_.Find(req.path_params.at("id"));
      if (!record) throw Error(ErrorCode::kNotFound, "unknown episode");
      res.set_content(ReadWholeFile(store_.AudioPath(*record)), kWav);
    });
  });

  srv.Get("/episodes/:id/sentences", [this](const httplib::Request& req,
                                            httplib::Response& res) {
    Guarded(res, [&] {
      const std::string& id = req.path_params.at("id");
      const auto record = store_.Find(id);
      if (!record) throw Error(ErrorCode::kNotFound, "unknown episode");
      json sentences = json::array();
      for (const Sentence& s : record->doc.sentences) {
        sentences.push_back(
            {{"index", s.index},
             {"text", s.text},
             {"start_s", Seconds(s.start)},
             {"end_s", Seconds(s.end)},
             {"audio", "/episodes/" + id + "/sentences/" +
                           std::to_string(s.index) + "/audio"}});
      }
      SendJson(res, 200,
               {{"episode_id", id}, {"sentences", std::move(sentences)}});
    });
  });

  srv.Get("/episodes/:id/sentences/:index/audio",
          [this](const httplib::Request& req, httplib::Response& res) {
            Guarded(res, [&] {
              const auto record = store_.Find(req.path_params.at("id"));
              if (!record) throw Error(ErrorCode::kNotFound, "unknown episode");
              const std::size_t i =
                  ParseCount(req.path_params.at("index"), "sentence index");
              if (i >= record->doc.size()) {
                throw Error(ErrorCode::kNotFound, "unknown sentence");
              }
              const Sentence& s = record->doc.sentences[i];
              res.set_content(
                  SliceWav(store_.AudioPath(*record), {s.start, s.end}), kWav);
            });
          });

  srv.Post("/episodes/:id/preview", [this](const httplib::Request& req,
                                           httplib::Response& res) {
    Guarded(res, [&] {
      const auto indices = ParseIndices(json::parse(req.body));
      const PreviewResponse p = Preview(req.path_params.at("id"), indices);
      SendJson(res, 200,
               {{"summary_text", p.summary_text},
                {"total_duration_s", p.total_duration_s},
                {"audio_token",
                 p.audio_token ? json(*p.audio_token) : json(nullptr)},
                {"audio", p.audio_token ? json("/previews/" + *p.audio_token)
                                        : json(nullptr)},
                {"valid", p.valid},
                {"validity_reason", p.validity_reason}});
    });
  });

  srv.Get("/previews/:token", [this](const httplib::Request& req,
                                     httplib::Response& res) {
    Guarded(res, [&] {
      auto wav = PreviewAudio(req.path_params.at("token"));
      if (!wav) throw Error(ErrorCode::kNotFound, "preview expired or unknown");
      res.set_content(std::move(*wav), kWav);
    });
  });

  srv.Get("/episodes/:id/annotation", [this](const httplib::Request& req,
                                             httplib::Response& res) {
    Guarded(res, [&] {
      const auto record = store_.Find(req.path_params.at("id"));
      if (!record) throw Error(ErrorCode::kNotFound, "unknown episode");
      if (!record->annotation) {
        throw Error(ErrorCode::kNotFound, "episode not annotated yet");
      }
      SendJson(res, 200, AnnotationJson(record->doc, *record->annotation));
    });
  });

  srv.Put("/episodes/:id/annotation", [this](const httplib::Request& req,
                                             httplib::Response& res) {
    Guarded(res, [&] {
      const std::string& id = req.path_params.at("id");
      const json body = json::parse(req.body);
      auto indices = ParseIndices(body);
      std::string annotator = body.value("annotator_id", "");
      if (annotator.empty()) annotator = req.get_header_value("X-Annotator-Id");
      if (annotator.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "annotator_id is required");
      }
      const auto record = store_.Find(id);
      if (!record) throw Error(ErrorCode::kNotFound, "unknown episode");
      const std::string reason = SummaryValidityReason(record->doc, indices);
      if (!reason.empty()) {
        SendJson(res, 422, {{"error", "annotation rejected: " + reason},
                            {"reason", reason}});
        return;
      }
      const int revision =
          store_.CommitAnnotation(id, std::move(indices), std::move(annotator));
      SendJson(res, 200, {{"episode_id", id}, {"revision", revision}});
    });
  });
}

}  // namespace castdigest
