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

#ifndef CASTDIGEST_ANNOTATION_SERVICE_H_
#define CASTDIGEST_ANNOTATION_SERVICE_H_

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include "castdigest/datastore.h"

namespace httplib {
class Server;
}

namespace castdigest {

struct AnnotationServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  Millis preview_ttl{std::chrono::minutes(10)};
  std::size_t preview_workers = 4;
  std::size_t page_size = 50;
};

struct PreviewResponse {
  std::string summary_text;
  double total_duration_s = 0.0;
  std::optional<std::string> audio_token;
  bool valid = false;
  std::string validity_reason;
};

// HTTP backend for the annotation workflow.
//
//   GET  /episodes?cursor=<id>&limit=<n>
//   GET  /episodes/{id}
//   GET  /episodes/{id}/audio                       (WAV, Range aware)
//   GET  /episodes/{id}/sentences
//   GET  /episodes/{id}/sentences/{index}/audio     (WAV, Range aware)
//   POST /episodes/{id}/preview     {"indices": [...]}
//   GET  /previews/{token}                          (WAV, Range aware)
//   GET  /episodes/{id}/annotation
//   PUT  /episodes/{id}/annotation  {"indices": [...], "annotator_id": ...}
//
// The annotator may also be named by an X-Annotator-Id header. Errors come
// back as {"error": ...}. There is no authentication.
class AnnotationService {
 public:
  AnnotationService(Datastore& store, AnnotationServiceConfig config);
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int Start();
  // Binds and serves on the calling thread until Stop().
  void Run();
  void Stop();

  // Direct entry points, also used by the HTTP handlers.
  PreviewResponse Preview(const std::string& episode_id,
                          const std::vector<std::size_t>& indices);
  std::optional<std::string> PreviewAudio(const std::string& token);

 private:
  struct CachedPreview {
    std::string wav;
    std::chrono::steady_clock::time_point expires;
  };

  void Routes();
  void EvictExpiredLocked(std::chrono::steady_clock::time_point now);

  Datastore& store_;
  AnnotationServiceConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::counting_semaphore<1024> stitch_slots_;
  std::mutex previews_mutex_;
  std::map<std::string, CachedPreview> previews_;
  std::uint64_t preview_counter_ = 0;
};

}  // namespace castdigest

#endif  // CASTDIGEST_ANNOTATION_SERVICE_H_
