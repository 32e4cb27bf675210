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

#ifndef CASTDIGEST_AUDIO_H_
#define CASTDIGEST_AUDIO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "castdigest/segmenter.h"
#include "castdigest/summarizer.h"

namespace castdigest {

// 16-bit PCM, interleaved by channel.
struct AudioClip {
  int sample_rate = 16000;
  int channels = 1;
  std::vector<std::int16_t> samples;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels)
                        : 0;
  }
  bool operator==(const AudioClip&) const = default;
};

struct Span {
  Millis start{0};
  Millis end{0};

  Millis duration() const { return end - start; }
  bool operator==(const Span&) const = default;
};

using SpanList = std::vector<Span>;

// Consecutive selected sentences closer than this are cut as one span.
inline constexpr Millis kSpanMergeGap{50};
inline constexpr Millis kDefaultCrossfade{20};

// Frame index of a time offset, rounding half away from zero.
std::size_t FrameAt(Millis t, int sample_rate);

// One span per selected sentence in index order, merging neighbours whose
// gap is under kSpanMergeGap. Throws kIndexOutOfRange.
SpanList SpansOf(const SentenceDoc& doc, const Selection& selection);

struct StitchOptions {
  // Zero gives hard cuts. Otherwise each join overlaps this much audio with
  // a linear fade, shortening the output accordingly.
  Millis crossfade{0};
};

// Concatenates frames [FrameAt(start), FrameAt(end)) of every span. With hard
// cuts the output is an exact subsequence of the input. Throws
// kSpanOutOfRange (with the span index) when a span runs past the clip.
AudioClip Stitch(const AudioClip& clip, const SpanList& spans,
                 StitchOptions options = {});

// RIFF/WAVE, 16-bit PCM only. Throws kUnsupportedEncoding for any other
// sample format and kTruncatedFile when the payload is shorter than the
// header claims.
AudioClip DecodeWav(std::string_view bytes);
std::string EncodeWav(const AudioClip& clip);

AudioClip ReadWav(const std::filesystem::path& path);
void WriteWav(const AudioClip& clip, const std::filesystem::path& path);

// Location of the PCM payload inside a WAV file.
struct WavLayout {
  int sample_rate = 0;
  int channels = 0;
  std::uint64_t data_offset = 0;
  std::uint64_t data_bytes = 0;

  std::uint64_t frames() const {
    return channels > 0 ? data_bytes / (2u * static_cast<unsigned>(channels))
                        : 0;
  }
};

WavLayout ProbeWav(const std::filesystem::path& path);

// Reads only the bytes of `span` from the file and wraps them in a fresh
// WAV header.
std::string SliceWav(const std::filesystem::path& path, Span span);

}  // namespace castdigest

#endif  // CASTDIGEST_AUDIO_H_
