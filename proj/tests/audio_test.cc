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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "castdigest/audio.h"
#include "castdigest/error.h"
#include "doctest.h"
#include "oracles.h"

namespace castdigest {
namespace {

using testing::CodeOf;

namespace fs = std::filesystem;

Span S(double a, double b) {
  return {Millis(std::llround(a * 1000)), Millis(std::llround(b * 1000))};
}

SentenceDoc DocWith(std::vector<Span> spans) {
  SentenceDoc doc;
  doc.episode_id = "ep";
  for (std::size_t i = 0; i < spans.size(); ++i) {
    doc.sentences.push_back({i, "s" + std::to_string(i), spans[i].start,
                             spans[i].end, 0, 0});
  }
  return doc;
}

void PutLe(std::string& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

// A hand-built RIFF header with arbitrary fields.
std::string RawWav(std::uint16_t bits, std::uint32_t declared_data,
                   std::size_t actual_data) {
  std::string out = "RIFF";
  PutLe(out, static_cast<std::uint32_t>(36 + actual_data), 4);
  out += "WAVEfmt ";
  PutLe(out, 16, 4);
  PutLe(out, 1, 2);
  PutLe(out, 1, 2);
  PutLe(out, 8000, 4);
  PutLe(out, 8000 * bits / 8, 4);
  PutLe(out, bits / 8, 2);
  PutLe(out, bits, 2);
  out += "data";
  PutLe(out, declared_data, 4);
  out.append(actual_data, '\x01');
  return out;
}

TEST_CASE("frame mapping rounds half away from zero") {
  CHECK(FrameAt(Millis(0), 16000) == 0);
  CHECK(FrameAt(Millis(1000), 16000) == 16000);
  // 1 ms at 500 Hz is half a frame.
  CHECK(FrameAt(Millis(1), 500) == 1);
  CHECK(FrameAt(Millis(3), 500) == 2);
  CHECK(FrameAt(Millis(1), 499) == 0);
  CHECK(CodeOf([] { FrameAt(Millis(-5), 16000); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("spans of a selection") {
  SentenceDoc doc = DocWith({S(0, 1), S(1, 2), S(2, 3), S(10.0, 12.5),
                             S(12.51, 15.0), S(16, 17), S(18, 19),
                             S(30, 31)});
  CHECK(SpansOf(doc, {"ep", {3}, 1}) == SpanList{S(10.0, 12.5)});
  CHECK(SpansOf(doc, {"ep", {3, 4}, 2}) == SpanList{S(10.0, 15.0)});
  CHECK(SpansOf(doc, {"ep", {3, 7}, 2}) ==
        SpanList{S(10.0, 12.5), S(30, 31)});
  // A 50 ms gap is not merged.
  doc.sentences[4].start = Millis(12550);
  CHECK(SpansOf(doc, {"ep", {3, 4}, 2}).size() == 2);
  doc.sentences[4].start = Millis(12549);
  CHECK(SpansOf(doc, {"ep", {3, 4}, 2}).size() == 1);
  std::optional<std::size_t> index;
  CHECK(CodeOf([&] { SpansOf(doc, {"ep", {1, 9}, 2}); }, &index) ==
        ErrorCode::kIndexOutOfRange);
  CHECK(index == std::size_t{9});
}

TEST_CASE("stitching") {
  const AudioClip clip = testing::RampClip(16000, 16000 * 5);
  SUBCASE("whole clip is the identity") {
    CHECK(Stitch(clip, {S(0, 5)}) == clip);
  }
  SUBCASE("two one-second spans make 32000 frames") {
    const AudioClip out = Stitch(clip, {S(0.5, 1.5), S(3, 4)});
    CHECK(out.frames() == 32000);
    CHECK(out.sample_rate == 16000);
    CHECK(std::equal(out.samples.begin(), out.samples.begin() + 16000,
                     clip.samples.begin() + 8000));
    CHECK(std::equal(out.samples.begin() + 16000, out.samples.end(),
                     clip.samples.begin() + 48000));
  }
  SUBCASE("a span past the end is reported by index") {
    std::optional<std::size_t> index;
    CHECK(CodeOf([&] { Stitch(clip, {S(0, 1), S(4.5, 5.1)}); }, &index) ==
          ErrorCode::kSpanOutOfRange);
    CHECK(index == std::size_t{1});
    CHECK(CodeOf([&] { Stitch(clip, {S(2, 1)}); }) ==
          ErrorCode::kInvalidArgument);
  }
  SUBCASE("stereo keeps channels together") {
    const AudioClip stereo = testing::RampClip(8000, 8000, 2);
    const AudioClip out = Stitch(stereo, {S(0.25, 0.5)});
    CHECK(out.channels == 2);
    CHECK(out.frames() == 2000);
    CHECK(out.samples[0] == stereo.samples[2 * 2000]);
    CHECK(out.samples[1] == stereo.samples[2 * 2000 + 1]);
  }
  SUBCASE("crossfade overlaps the joins") {
    const AudioClip out =
        Stitch(clip, {S(0, 1), S(2, 3), S(4, 5)}, {kDefaultCrossfade});
    const std::size_t fade = FrameAt(kDefaultCrossfade, 16000);
    CHECK(out.frames() == 3 * 16000 - 2 * fade);
    // Far from the joins the samples are untouched.
    CHECK(out.samples[100] == clip.samples[100]);
    CHECK(out.samples[16000] == clip.samples[32000 + fade]);
  }
}

TEST_CASE("stitched output is a subsequence of the input") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int rate = 8000 + static_cast<int>(rng() % 3) * 4000;
    const AudioClip clip = testing::RampClip(rate, rate * 20);
    SpanList spans;
    long t = 0;
    while (true) {
      t += static_cast<long>(rng() % 2000);
      const long end = t + 1 + static_cast<long>(rng() % 3000);
      if (end > 20000) break;
      spans.push_back({Millis(t), Millis(end)});
      t = end;
    }
    const AudioClip out = Stitch(clip, spans);
    std::size_t expected = 0;
    std::size_t pos = 0;
    for (const Span& s : spans) {
      const std::size_t b = FrameAt(s.start, rate);
      const std::size_t e = FrameAt(s.end, rate);
      CHECK(std::equal(clip.samples.begin() + b, clip.samples.begin() + e,
                       out.samples.begin() + pos));
      pos += e - b;
      expected += e - b;
      // Within one frame of the exact duration.
      const double exact = static_cast<double>(s.duration().count()) * rate / 1000.0;
      CHECK(std::abs(static_cast<double>(e - b) - exact) <= 1.0);
    }
    CHECK(out.frames() == expected);
  }
}

TEST_CASE("WAV round trip and error cases") {
  const std::string dir = testing::TempDir("audio");
  AudioClip sine;
  sine.sample_rate = 16000;
  for (int i = 0; i < 16000; ++i) {
    sine.samples.push_back(static_cast<std::int16_t>(
        std::lround(12000 * std::sin(2 * std::numbers::pi * 440 * i / 16000.0))));
  }
  const fs::path path = fs::path(dir) / "sine.wav";
  WriteWav(sine, path);
  CHECK(ReadWav(path) == sine);
  CHECK(fs::file_size(path) == 44 + 32000);

  const WavLayout layout = ProbeWav(path);
  CHECK(layout.sample_rate == 16000);
  CHECK(layout.data_offset == 44);
  CHECK(layout.frames() == 16000);

  const AudioClip slice = DecodeWav(SliceWav(path, S(0.25, 0.5)));
  CHECK(slice == Stitch(sine, {S(0.25, 0.5)}));
  CHECK(CodeOf([&] { SliceWav(path, S(0.5, 1.5)); }) ==
        ErrorCode::kSpanOutOfRange);

  CHECK(CodeOf([] { DecodeWav(RawWav(8, 100, 100)); }) ==
        ErrorCode::kUnsupportedEncoding);
  CHECK(CodeOf([] { DecodeWav(RawWav(24, 99, 99)); }) ==
        ErrorCode::kUnsupportedEncoding);
  CHECK(CodeOf([] { DecodeWav(RawWav(16, 1000, 200)); }) ==
        ErrorCode::kTruncatedFile);
  CHECK(CodeOf([] { DecodeWav("RIFF"); }) == ErrorCode::kTruncatedFile);
  CHECK(CodeOf([] { DecodeWav(std::string(64, 'x')); }) ==
        ErrorCode::kUnsupportedEncoding);
  CHECK(DecodeWav(RawWav(16, 200, 200)).frames() == 100);

  std::string bytes = EncodeWav(sine);
  bytes.resize(bytes.size() - 10);
  std::ofstream(fs::path(dir) / "cut.wav", std::ios::binary) << bytes;
  CHECK(CodeOf([&] { ReadWav(fs::path(dir) / "cut.wav"); }) ==
        ErrorCode::kTruncatedFile);
  CHECK(CodeOf([&] { ReadWav(fs::path(dir) / "absent.wav"); }) ==
        ErrorCode::kIo);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace castdigest
