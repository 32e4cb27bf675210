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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "castdigest/audio.h"
#include "castdigest/cli.h"
#include "castdigest/datastore.h"
#include "doctest.h"
#include "json.hpp"
#include "oracles.h"

namespace castdigest {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<json> Lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

// Small synthetic corpus with audio, shared by the cases below.
const fs::path& FixtureDir() {
  static const fs::path dir = [] {
    const fs::path d = testing::TempDir("cli");
    const Run r = Cli({"fixtures", "--out", d.string(), "--series", "3",
                       "--episodes-mean", "5", "--sample-rate", "2000",
                       "--seed", "4"});
    REQUIRE(r.code == kExitOk);
    return d;
  }();
  return dir;
}

std::string Corpus() { return (FixtureDir() / "corpus.jsonl").string(); }

TEST_CASE("summarize with the lead scorer picks the first k sentences") {
  const Run r = Cli({"summarize", Corpus(), "--scorer", "lead", "--k", "15"});
  REQUIRE(r.code == kExitOk);
  const auto lines = Lines(r.out);
  REQUIRE_FALSE(lines.empty());
  for (const json& sel : lines) {
    REQUIRE(sel["indices"].size() == 15);
    for (std::size_t i = 0; i < 15; ++i) CHECK(sel["indices"][i] == i);
    CHECK(sel["scorer"] == "lead");
  }
}

TEST_CASE("config file settings are overridden by flags") {
  const fs::path cfg = fs::path(testing::TempDir("cfg")) / "run.ini";
  std::ofstream(cfg) << "k=3\nscorer=lead\n";
  Run r = Cli({"--config", cfg.string(), "summarize", Corpus()});
  REQUIRE(r.code == kExitOk);
  CHECK(Lines(r.out).front()["indices"].size() == 3);
  r = Cli({"--config", cfg.string(), "summarize", Corpus(), "--k", "4"});
  REQUIRE(r.code == kExitOk);
  CHECK(Lines(r.out).front()["indices"].size() == 4);
}

TEST_CASE("stitch agrees with summarize --emit-audio") {
  const fs::path work = testing::TempDir("stitch");
  const fs::path sel = work / "sel.jsonl";
  REQUIRE(Cli({"summarize", Corpus(), "--out", sel.string(), "--emit-audio",
               (work / "a").string()})
              .code == kExitOk);
  REQUIRE(Cli({"stitch", Corpus(), sel.string(), "--out",
               (work / "b").string()})
              .code == kExitOk);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(work / "a")) {
    const fs::path other = work / "b" / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(Slurp(entry.path()) == Slurp(other));
    CHECK(ReadWav(other).sample_rate == 2000);
    ++compared;
  }
  CHECK(compared == static_cast<int>(Lines(Slurp(sel)).size()));
}

TEST_CASE("evaluate of a file against itself is perfect") {
  const fs::path sel = fs::path(testing::TempDir("eval")) / "sel.jsonl";
  REQUIRE(Cli({"summarize", Corpus(), "--out", sel.string()}).code == kExitOk);
  const Run r = Cli({"evaluate", sel.string(), sel.string()});
  REQUIRE(r.code == kExitOk);
  const json report = json::parse(r.out);
  for (const char* metric : {"rouge1", "rouge2", "rougeL"}) {
    CHECK(report["mean"][metric]["f1"] == doctest::Approx(1.0));
  }
}

TEST_CASE("crossval output is reproducible") {
  const std::vector<std::string> args = {"crossval", Corpus(), "--seed", "7",
                                         "--k-folds", "3"};
  const Run a = Cli(args);
  REQUIRE(a.code == kExitOk);
  std::vector<std::string> parallel = args;
  parallel.insert(parallel.end(), {"--workers", "4"});
  const Run b = Cli(parallel);
  REQUIRE(b.code == kExitOk);
  CHECK(a.out == b.out);
  const json report = json::parse(a.out);
  CHECK(report.dump().find("lead-5") != std::string::npos);

  std::vector<std::string> table = args;
  table.insert(table.end(), {"--format", "table"});
  const Run t = Cli(table);
  REQUIRE(t.code == kExitOk);
  CHECK(t.out.find("ROUGE") != std::string::npos);
}

TEST_CASE("augment emits factor + 1 records per annotated episode") {
  const Run r = Cli({"augment", Corpus(), "--factor", "2"});
  REQUIRE(r.code == kExitOk);
  const auto records = Lines(r.out);
  const auto originals = LoadCorpus(Corpus());
  std::size_t annotated = 0;
  for (const auto& rec : originals) annotated += rec.annotation ? 1 : 0;
  CHECK(records.size() == annotated * 3);
  std::size_t augmented = 0;
  for (const json& rec : records) {
    if (rec.contains("provenance") && rec["provenance"].is_object()) {
      ++augmented;
      CHECK(rec["episode_id"].get<std::string>().find("#aug") !=
            std::string::npos);
    }
  }
  CHECK(augmented == annotated * 2);
}

TEST_CASE("exit codes") {
  CHECK(Cli({}).code == kExitInputError);
  CHECK(Cli({"bogus"}).code == kExitInputError);
  CHECK(Cli({"summarize", "/nonexistent/x.jsonl"}).code == kExitInputError);
  CHECK(Cli({"summarize", Corpus(), "--k", "0"}).code == kExitInputError);
  CHECK(Cli({"summarize", Corpus(), "--scorer", "nope"}).code ==
        kExitInputError);
  CHECK(Cli({"--help"}).code == kExitOk);

  const fs::path bad = fs::path(testing::TempDir("bad")) / "bad.jsonl";
  std::ofstream(bad) << "{not json\n";
  CHECK(Cli({"summarize", bad.string()}).code == kExitInputError);

  // Nothing listens on the discard port.
  const Run r = Cli({"summarize", Corpus(), "--scorer", "external",
                     "--scorer-endpoint", "http://127.0.0.1:9"});
  CHECK(r.code == kExitProcessingError);
  CHECK_FALSE(r.err.empty());
}

}  // namespace
}  // namespace castdigest
