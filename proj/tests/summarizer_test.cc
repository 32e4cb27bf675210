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

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "castdigest/error.h"
#include "castdigest/summarizer.h"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "oracles.h"

namespace castdigest {
namespace {

using testing::CodeOf;

using nlohmann::json;

SentenceDoc TextDoc(const std::vector<std::string>& texts) {
  SentenceDoc doc;
  doc.episode_id = "ep";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Sentence s;
    s.index = i;
    s.text = texts[i];
    s.start = Millis(1000 * static_cast<long>(i));
    s.end = s.start + Millis(900);
    doc.sentences.push_back(s);
  }
  return doc;
}

std::string Words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i);
  return out;
}

std::vector<std::size_t> Range(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

TEST_CASE("LEAD-n takes the first sentences") {
  CHECK(LeadN(testing::TimedDoc("ep", std::vector<double>(30, 1.0)), 5)
            .indices == Range(5));
  CHECK(LeadN(testing::TimedDoc("ep", {1, 1, 1}), 15).indices == Range(3));
  CHECK(LeadN(testing::TimedDoc("ep", {1}), 1).indices == Range(1));
  CHECK(LeadN(testing::TimedDoc("ep", {1}), 1).k_requested == 1);
  CHECK(CodeOf([] { LeadN(SentenceDoc{}, 3); }) == ErrorCode::kEmptyDocument);
  CHECK(CodeOf([] { LeadN(testing::TimedDoc("ep", {1}), 0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("truncation keeps whole sentences within the budget") {
  const SentenceDoc three = TextDoc({Words(200), Words(200), Words(200)});
  CHECK(TruncateTokens(three, 512).size() == 2);
  const SentenceDoc small = TextDoc({"a b c", "d e f g", "h i j"});
  CHECK(TruncateTokens(small, 512) == small);
  const SentenceDoc huge = TextDoc({Words(600), "short one"});
  CHECK(TruncateTokens(huge, 512).size() == 1);
  CHECK(TruncateTokens(TextDoc({Words(512), "x"}), 512).size() == 1);
  CHECK(TruncateTokens(TextDoc({Words(511), "x"}), 512).size() == 2);
  CHECK(CodeOf([&] { TruncateTokens(small, 0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("truncation is idempotent") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> texts;
    for (std::size_t i = 0, n = 1 + rng() % 20; i < n; ++i) {
      texts.push_back(Words(1 + rng() % 80));
    }
    const std::size_t budget = 1 + rng() % 400;
    const SentenceDoc once = TruncateTokens(TextDoc(texts), budget);
    CHECK(TruncateTokens(once, budget) == once);
  }
}

TEST_CASE("top-k picks the best scores and returns them in order") {
  CHECK(SelectTopK({"ep", {0.1, 0.9, 0.5}}, 2).indices ==
        std::vector<std::size_t>{1, 2});
  CHECK(SelectTopK({"ep", {0.4, 0.4, 0.4}}, 2).indices ==
        std::vector<std::size_t>{0, 1});
  CHECK(SelectTopK({"ep", {0.3, 0.1, 0.2}}, 7).indices == Range(3));
  CHECK(SelectTopK({"ep", {0.3, 0.1, 0.2}}, 7).k_requested == 7);
  CHECK(CodeOf([] { SelectTopK({"ep", {0.5}}, 0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("top-k selection size is min(k, m)") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(1 + rng() % 30);
    for (double& v : s) v = static_cast<double>(rng() % 5) / 4.0;
    const std::size_t k = 1 + rng() % 40;
    const Selection sel = SelectTopK({"ep", s}, k);
    CHECK(sel.indices.size() == std::min(k, s.size()));
    CHECK(std::is_sorted(sel.indices.begin(), sel.indices.end()));
    CHECK(std::adjacent_find(sel.indices.begin(), sel.indices.end()) ==
          sel.indices.end());
  }
}

TEST_CASE("score validation") {
  const SentenceDoc doc = testing::TimedDoc("ep", {1, 1, 1});
  CHECK_NOTHROW(ValidateScores(doc, {"ep", {0.0, 1.0, 0.5}}));
  CHECK(CodeOf([&] { ValidateScores(doc, {"ep", {0.0, 1.0}}); }) ==
        ErrorCode::kLengthMismatch);
  CHECK(CodeOf([&] { ValidateScores(doc, {"ep", {0.0, 1.2, 0.1}}); }) ==
        ErrorCode::kScoreOutOfRange);
  CHECK(CodeOf([&] { ValidateScores(doc, {"ep", {0.0, NAN, 0.1}}); }) ==
        ErrorCode::kScoreOutOfRange);
}

TEST_CASE("reference scorer") {
  SUBCASE("a single sentence scores one") {
    CHECK(ReferenceScores(TextDoc({"just one"})).scores ==
          std::vector<double>{1.0});
  }
  SUBCASE("repetitive runs score zero") {
    const SentenceDoc doc =
        TextDoc({"welcome to the show", "welcome to the show again",
                 "cats and dogs", "dogs and cats play", "cats"});
    const std::vector<IndexRun> runs = {{0, 1}};
    const SentenceScores s = ReferenceScores(doc, runs);
    CHECK(s.scores[0] == 0.0);
    CHECK(s.scores[1] == 0.0);
    CHECK(*std::max_element(s.scores.begin(), s.scores.end()) == 1.0);
    ValidateScores(doc, s);
  }
  SUBCASE("duplicating the best sentence keeps the tie") {
    const std::vector<std::string> texts = {"red green blue", "red red green",
                                            "yellow", "green blue blue red"};
    const SentenceScores base = ReferenceScores(TextDoc(texts));
    const std::size_t best =
        std::max_element(base.scores.begin(), base.scores.end()) -
        base.scores.begin();
    std::vector<std::string> dup = texts;
    dup.push_back(texts[best]);
    const SentenceScores s = ReferenceScores(TextDoc(dup));
    CHECK(s.scores[best] == s.scores.back());
  }
  SUBCASE("all-equal sentences score one") {
    const SentenceScores s = ReferenceScores(TextDoc({"a b", "a b", "a b"}));
    CHECK(s.scores == std::vector<double>{1.0, 1.0, 1.0});
  }
  SUBCASE("the scorer class applies the runs of its episode") {
    const SentenceDoc doc = TextDoc({"x y", "x y z", "z"});
    ReferenceScorer scorer({{"ep", {{0, 1}}}, {"other", {{2, 2}}}});
    const SentenceScores s = scorer.Score(doc);
    CHECK(s.scores[0] == 0.0);
    CHECK(s.scores[1] == 0.0);
    CHECK(s.scores[2] == 1.0);
  }
}

TEST_CASE("lead scorer reproduces LEAD-k") {
  const SentenceDoc doc = testing::TimedDoc("ep", std::vector<double>(20, 1));
  for (std::size_t k : {1, 5, 12, 30}) {
    CHECK(Summarize(doc, LeadScorer(), k).indices == LeadN(doc, k).indices);
  }
}

TEST_CASE("summarize only scores the truncated prefix") {
  std::vector<std::string> texts(10, Words(100));
  const SentenceDoc doc = TextDoc(texts);
  const Selection sel = Summarize(doc, LeadScorer(), 12, 512);
  CHECK(sel.indices == Range(5));
}

// Scores 1/(i+1) for sentence i, or a canned reply.
std::string MockReply(const std::string& request, const std::string& mode) {
  const json req = json::parse(request);
  const std::size_t m = req["sentences"].size();
  if (mode == "error") return R"({"error": "model not loaded"})";
  json scores = json::array();
  const std::size_t n = mode == "short" ? m - 1 : m;
  for (std::size_t i = 0; i < n; ++i) scores.push_back(1.0 / (i + 1.0));
  if (mode == "range") scores[0] = 1.2;
  return json{{"episode_id", req["episode_id"]}, {"scores", scores}}.dump();
}

class HttpScorer {
 public:
  explicit HttpScorer(std::string mode) : mode_(std::move(mode)) {
    server_.Post("/model/score",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   if (mode_ == "slow") {
                     std::this_thread::sleep_for(std::chrono::milliseconds(400));
                   }
                   res.set_content(MockReply(req.body, mode_),
                                   "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~HttpScorer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/model";
  }

 private:
  httplib::Server server_;
  std::string mode_;
  int port_ = 0;
  std::thread thread_;
};

// One-connection newline-JSON scorer on a raw socket.
class TcpScorer {
 public:
  explicit TcpScorer(std::string mode) : mode_(std::move(mode)) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    ::listen(fd_, 1);
    thread_ = std::thread([this] {
      const int conn = ::accept(fd_, nullptr, nullptr);
      if (conn < 0) return;
      std::string line;
      char c;
      while (::recv(conn, &c, 1, 0) == 1 && c != '\n') line += c;
      const std::string reply = MockReply(line, mode_) + "\n";
      ::send(conn, reply.data(), reply.size(), 0);
      ::close(conn);
    });
  }
  ~TcpScorer() {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    thread_.join();
  }
  std::string url() const { return "tcp://127.0.0.1:" + std::to_string(port_); }

 private:
  std::string mode_;
  int fd_ = -1;
  int port_ = 0;
  std::thread thread_;
};

template <typename Mock>
void CheckExternal() {
  const SentenceDoc doc = TextDoc({"a", "b", "c", "d"});
  {
    Mock mock("ok");
    const SentenceScores s = ExternalScores({mock.url()}, doc);
    REQUIRE(s.scores.size() == 4);
    CHECK(s.scores[3] == doctest::Approx(0.25));
    CHECK(s.episode_id == "ep");
  }
  {
    Mock mock("short");
    CHECK(CodeOf([&] { ExternalScores({mock.url()}, doc); }) ==
          ErrorCode::kLengthMismatch);
  }
  {
    Mock mock("range");
    CHECK(CodeOf([&] { ExternalScores({mock.url()}, doc); }) ==
          ErrorCode::kScoreOutOfRange);
  }
  {
    Mock mock("error");
    CHECK(CodeOf([&] { ExternalScores({mock.url()}, doc); }) ==
          ErrorCode::kService);
  }
}

TEST_CASE("external scorer over HTTP") {
  CheckExternal<HttpScorer>();
  HttpScorer slow("slow");
  CHECK(CodeOf([&] {
          ExternalScores({slow.url(), Millis(100)}, TextDoc({"a"}));
        }) == ErrorCode::kTimeout);
  CHECK(CodeOf([&] {
          ExternalScores({"http://127.0.0.1:1"}, TextDoc({"a"}));
        }) == ErrorCode::kNetwork);
}

TEST_CASE("external scorer over a plain socket") {
  CheckExternal<TcpScorer>();
  CHECK(CodeOf([&] {
          ExternalScores({"tcp://127.0.0.1:1"}, TextDoc({"a"}));
        }) == ErrorCode::kNetwork);
}

TEST_CASE("summarize with the external scorer") {
  HttpScorer mock("ok");
  const ExternalScorer scorer({mock.url()});
  const Selection sel = Summarize(TextDoc({"a", "b", "c", "d"}), scorer, 2);
  CHECK(sel.indices == std::vector<std::size_t>{0, 1});
}

}  // namespace
}  // namespace castdigest
