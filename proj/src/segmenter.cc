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

#include "castdigest/segmenter.h"

#include <cmath>
#include <sstream>

#include "castdigest/error.h"
#include "json.hpp"

namespace castdigest {
namespace {

bool EndsSentence(const std::string& punctuation) {
  if (punctuation.empty()) return false;
  const char last = punctuation.back();
  return last == '.' || last == '?' || last == '!';
}

}  // namespace

SentenceDoc Segment(const Transcript& transcript, double pause_threshold_s) {
  if (!(pause_threshold_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "pause threshold must be positive");
  }
  const double threshold_ms = pause_threshold_s * 1000.0;

  SentenceDoc doc;
  doc.episode_id = transcript.episode_id;
  doc.audio_ref = transcript.audio_ref;
  doc.duration = transcript.duration;

  bool open = false;
  const auto& tokens = transcript.tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const WordToken& token = tokens[i];
    if (token.is_pronunciation()) {
      if (open &&
          static_cast<double>((*token.start - doc.sentences.back().end)
                                  .count()) > threshold_ms) {
        open = false;
      }
      if (!open) {
        Sentence sentence;
        sentence.index = doc.sentences.size();
        // Leading orphan punctuation is folded into the first sentence.
        sentence.token_begin = doc.sentences.empty() ? 0 : i;
        sentence.start = *token.start;
        doc.sentences.push_back(std::move(sentence));
        open = true;
      }
      Sentence& current = doc.sentences.back();
      if (!current.text.empty()) current.text += ' ';
      current.text += token.content;
      current.end = *token.end;
      current.token_end = i + 1;
    } else if (open) {
      Sentence& current = doc.sentences.back();
      current.text += token.content;
      current.token_end = i + 1;
      if (EndsSentence(token.content)) open = false;
    } else if (!doc.sentences.empty()) {
      doc.sentences.back().token_end = i + 1;
    }
  }
  if (doc.sentences.empty()) {
    throw Error(ErrorCode::kEmptyDocument,
                "transcript " + transcript.episode_id + " has no words");
  }
  return doc;
}

void Reindex(SentenceDoc& doc) {
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    doc.sentences[i].index = i;
  }
}

std::string SentencesToJsonl(const SentenceDoc& doc) {
  std::string out;
  for (const Sentence& s : doc.sentences) {
    const nlohmann::json record = {
        {"index", s.index},
        {"text", s.text},
        {"start_s", static_cast<double>(s.start.count()) / 1000.0},
        {"end_s", static_cast<double>(s.end.count()) / 1000.0}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::vector<Sentence> SentencesFromJsonl(std::string_view text) {
  std::vector<Sentence> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto record = nlohmann::json::parse(line);
      Sentence s;
      s.index = record.at("index").get<std::size_t>();
      s.text = record.at("text").get<std::string>();
      s.start = Millis(std::llround(record.at("start_s").get<double>() * 1000));
      s.end = Millis(std::llround(record.at("end_s").get<double>() * 1000));
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedDocument,
                  "sentence line " + std::to_string(line_no) + ": " + e.what(),
                  line_no - 1);
    }
  }
  return out;
}

}  // namespace castdigest
