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

#include "castdigest/summarizer.h"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string_view>

#include "castdigest/error.h"
#include "castdigest/text.h"
#include "http_util.h"
#include "json.hpp"

namespace castdigest {
namespace {

using nlohmann::json;
using TermVector = std::map<std::string, double>;

void RequireNonEmpty(const SentenceDoc& doc) {
  if (doc.empty()) {
    throw Error(ErrorCode::kEmptyDocument,
                "episode " + doc.episode_id + " has no sentences");
  }
}

TermVector TermFrequencies(std::string_view text) {
  TermVector tf;
  for (auto& token : AlnumTokens(text)) tf[token] += 1.0;
  return tf;
}

double Cosine(const TermVector& a, const TermVector& b) {
  double dot = 0.0;
  double norm_a = 0.0;
  for (const auto& [term, weight] : a) {
    norm_a += weight * weight;
    if (auto it = b.find(term); it != b.end()) dot += weight * it->second;
  }
  double norm_b = 0.0;
  for (const auto& [term, weight] : b) norm_b += weight * weight;
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), 0.0, 1.0);
}

// Closes the socket on scope exit.
class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

std::string TcpRoundTrip(std::string_view host_port, const std::string& line,
                         Millis timeout) {
  const auto colon = host_port.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "tcp endpoint needs host:port, got '" + std::string(host_port) +
                    "'");
  }
  const std::string host(host_port.substr(0, colon));
  const std::string port(host_port.substr(colon + 1));

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found);
      rc != 0) {
    throw Error(ErrorCode::kNetwork, "cannot resolve " + host + ": " +
                                         ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> addresses(
      found, &::freeaddrinfo);

  timeval tv{};
  tv.tv_sec = timeout.count() / 1000;
  tv.tv_usec = (timeout.count() % 1000) * 1000;

  for (addrinfo* a = addresses.get(); a != nullptr; a = a->ai_next) {
    Socket sock(::socket(a->ai_family, a->ai_socktype, a->ai_protocol));
    if (sock.get() < 0) continue;
    ::setsockopt(sock.get(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(sock.get(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    if (::connect(sock.get(), a->ai_addr, a->ai_addrlen) != 0) continue;

    const std::string payload = line + "\n";
    std::size_t sent = 0;
    while (sent < payload.size()) {
      const ssize_t n = ::send(sock.get(), payload.data() + sent,
                               payload.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) {
        throw Error(ErrorCode::kNetwork,
                    std::string("send failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
    std::string response;
    char buf[4096];
    while (response.find('\n') == std::string::npos) {
      const ssize_t n = ::recv(sock.get(), buf, sizeof(buf), 0);
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
        throw Error(ErrorCode::kTimeout, "scorer did not answer within " +
                                             std::to_string(timeout.count()) +
                                             " ms");
      }
      if (n < 0) {
        throw Error(ErrorCode::kNetwork,
                    std::string("recv failed: ") + std::strerror(errno));
      }
      if (n == 0) break;
      response.append(buf, static_cast<std::size_t>(n));
    }
    if (auto nl = response.find('\n'); nl != std::string::npos) {
      response.resize(nl);
    }
    if (response.empty()) {
      throw Error(ErrorCode::kNetwork, "scorer closed the connection");
    }
    return response;
  }
  throw Error(ErrorCode::kNetwork, "cannot connect to " + host + ":" + port);
}

std::string HttpRoundTrip(const std::string& url, const std::string& body,
                          Millis timeout) {
  const internal::Url parts = internal::SplitUrl(url);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(parts.prefix + "/score", body, "application/json");
  if (!res) {
    if (res.error() == httplib::Error::Read) {
      throw Error(ErrorCode::kTimeout, "scorer did not answer: " +
                                           httplib::to_string(res.error()));
    }
    internal::ThrowTransportError(res.error(), "scorer");
  }
  // Error payloads may come with any status; the body decides.
  return res->body;
}

}  // namespace

Selection LeadN(const SentenceDoc& doc, std::size_t n) {
  RequireNonEmpty(doc);
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  Selection out{doc.episode_id, {}, n};
  out.indices.resize(std::min(n, doc.size()));
  std::iota(out.indices.begin(), out.indices.end(), std::size_t{0});
  return out;
}

SentenceDoc TruncateTokens(const SentenceDoc& doc, std::size_t max_tokens) {
  RequireNonEmpty(doc);
  if (max_tokens == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_tokens must be >= 1");
  }
  SentenceDoc out = doc;
  std::size_t used = 0;
  std::size_t keep = 0;
  for (const Sentence& s : doc.sentences) {
    used += WhitespaceTokenCount(s.text);
    if (used > max_tokens && keep > 0) break;
    ++keep;
  }
  out.sentences.resize(keep);
  return out;
}

Selection SelectTopK(const SentenceScores& scores, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::vector<std::size_t> order(scores.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores.scores[a] != scores.scores[b]) {
                        return scores.scores[a] > scores.scores[b];
                      }
                      return a < b;
                    });
  order.resize(take);
  std::sort(order.begin(), order.end());
  return Selection{scores.episode_id, std::move(order), k};
}

void ValidateScores(const SentenceDoc& doc, const SentenceScores& scores) {
  if (scores.scores.size() != doc.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "expected " + std::to_string(doc.size()) + " scores for " +
                    doc.episode_id + ", got " +
                    std::to_string(scores.scores.size()));
  }
  for (std::size_t i = 0; i < scores.scores.size(); ++i) {
    const double s = scores.scores[i];
    if (!(s >= 0.0 && s <= 1.0)) {
      throw Error(ErrorCode::kScoreOutOfRange,
                  "score " + std::to_string(s) + " at sentence " +
                      std::to_string(i) + " is outside [0, 1]",
                  i);
    }
  }
}

SentenceScores ReferenceScores(const SentenceDoc& doc,
                               std::span<const IndexRun> repetitive_runs) {
  RequireNonEmpty(doc);
  const std::size_t m = doc.size();
  std::vector<bool> masked(m, false);
  for (const IndexRun& run : repetitive_runs) {
    for (std::size_t i = run.first; i <= run.last && i < m; ++i) {
      masked[i] = true;
    }
  }

  std::vector<TermVector> vectors;
  vectors.reserve(m);
  TermVector centroid;
  for (std::size_t i = 0; i < m; ++i) {
    vectors.push_back(TermFrequencies(doc.sentences[i].text));
    if (masked[i]) continue;
    for (const auto& [term, weight] : vectors.back()) centroid[term] += weight;
  }

  SentenceScores out{doc.episode_id, std::vector<double>(m, 0.0)};
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (masked[i]) continue;
    out.scores[i] = Cosine(vectors[i], centroid);
    lo = std::min(lo, out.scores[i]);
    hi = std::max(hi, out.scores[i]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (masked[i]) continue;
    out.scores[i] = hi > lo ? (out.scores[i] - lo) / (hi - lo) : 1.0;
  }
  return out;
}

SentenceScores ExternalScores(const ScorerEndpoint& endpoint,
                              const SentenceDoc& doc) {
  json request = {{"episode_id", doc.episode_id},
                  {"sentences", json::array()}};
  for (const Sentence& s : doc.sentences) request["sentences"].push_back(s.text);

  std::string raw;
  const std::string_view url = endpoint.url;
  if (url.starts_with("tcp://")) {
    raw = TcpRoundTrip(url.substr(6), request.dump(), endpoint.timeout);
  } else {
    raw = HttpRoundTrip(endpoint.url, request.dump(), endpoint.timeout);
  }

  json response;
  try {
    response = json::parse(raw);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::kService, "scorer sent non-JSON: " + raw);
  }
  if (response.contains("error")) {
    throw Error(ErrorCode::kService,
                "scorer error: " + response["error"].dump());
  }
  if (!response.contains("scores") || !response["scores"].is_array()) {
    throw Error(ErrorCode::kService, "scorer response has no scores array");
  }
  SentenceScores out{doc.episode_id, {}};
  for (const auto& value : response["scores"]) {
    if (!value.is_number()) {
      throw Error(ErrorCode::kScoreOutOfRange, "non-numeric score " +
                                                   value.dump());
    }
    out.scores.push_back(value.get<double>());
  }
  ValidateScores(doc, out);
  return out;
}

Selection Summarize(const SentenceDoc& doc, const Scorer& scorer,
                    std::size_t k, std::size_t max_tokens) {
  const SentenceDoc prefix = TruncateTokens(doc, max_tokens);
  const SentenceScores scores = scorer.Score(prefix);
  ValidateScores(prefix, scores);
  return SelectTopK(scores, k);
}

SentenceScores LeadScorer::Score(const SentenceDoc& doc) const {
  RequireNonEmpty(doc);
  const std::size_t m = doc.size();
  SentenceScores out{doc.episode_id, std::vector<double>(m)};
  for (std::size_t i = 0; i < m; ++i) {
    out.scores[i] = static_cast<double>(m - i) / static_cast<double>(m);
  }
  return out;
}

SentenceScores ReferenceScorer::Score(const SentenceDoc& doc) const {
  if (auto it = runs_.find(doc.episode_id); it != runs_.end()) {
    return ReferenceScores(doc, it->second);
  }
  return ReferenceScores(doc);
}

}  // namespace castdigest
