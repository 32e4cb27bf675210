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

#include "castdigest/audio.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>

#include "castdigest/error.h"

namespace castdigest {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t Le32(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return static_cast<std::uint32_t>(u[0]) |
         (static_cast<std::uint32_t>(u[1]) << 8) |
         (static_cast<std::uint32_t>(u[2]) << 16) |
         (static_cast<std::uint32_t>(u[3]) << 24);
}

std::uint16_t Le16(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return static_cast<std::uint16_t>(u[0] | (u[1] << 8));
}

void PutLe32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void PutLe16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>((v >> 8) & 0xFF);
}

std::string Header(int sample_rate, int channels, std::uint64_t data_bytes) {
  if (data_bytes > 0xFFFFFFFFull - 36) {
    throw Error(ErrorCode::kInvalidArgument, "audio too long for RIFF/WAVE");
  }
  const auto block = static_cast<std::uint16_t>(2 * channels);
  std::string out;
  out.reserve(44);
  out += "RIFF";
  PutLe32(out, static_cast<std::uint32_t>(36 + data_bytes));
  out += "WAVEfmt ";
  PutLe32(out, 16);
  PutLe16(out, kFormatPcm);
  PutLe16(out, static_cast<std::uint16_t>(channels));
  PutLe32(out, static_cast<std::uint32_t>(sample_rate));
  PutLe32(out, static_cast<std::uint32_t>(sample_rate) * block);
  PutLe16(out, block);
  PutLe16(out, 16);
  out += "data";
  PutLe32(out, static_cast<std::uint32_t>(data_bytes));
  return out;
}

Error Truncated(const std::string& what) {
  return Error(ErrorCode::kTruncatedFile, what);
}

// Walks the chunk list of a WAV stream of `total` bytes.
WavLayout ReadLayout(std::istream& in, std::uint64_t total) {
  std::array<char, 12> riff{};
  if (total < riff.size() || !in.read(riff.data(), riff.size())) {
    throw Truncated("file shorter than a RIFF header");
  }
  if (std::memcmp(riff.data(), "RIFF", 4) != 0 ||
      std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kUnsupportedEncoding, "not a RIFF/WAVE file");
  }

  WavLayout layout;
  bool have_format = false;
  std::uint64_t pos = riff.size();
  while (true) {
    std::array<char, 8> chunk{};
    if (pos + chunk.size() > total || !in.read(chunk.data(), chunk.size())) {
      throw Truncated("no data chunk before end of file");
    }
    pos += chunk.size();
    const std::uint64_t size = Le32(chunk.data() + 4);
    if (std::memcmp(chunk.data(), "fmt ", 4) == 0) {
      if (size < 16 || pos + size > total) throw Truncated("short fmt chunk");
      std::string fmt(size, '\0');
      in.read(fmt.data(), static_cast<std::streamsize>(size));
      const std::uint16_t format = Le16(fmt.data());
      layout.channels = Le16(fmt.data() + 2);
      layout.sample_rate = static_cast<int>(Le32(fmt.data() + 4));
      const std::uint16_t bits = Le16(fmt.data() + 14);
      bool pcm = format == kFormatPcm;
      if (format == kFormatExtensible && size >= 26) {
        pcm = Le16(fmt.data() + 24) == kFormatPcm;
      }
      if (!pcm) {
        throw Error(ErrorCode::kUnsupportedEncoding,
                    "format tag " + std::to_string(format) + " is not PCM");
      }
      if (bits != 16) {
        throw Error(ErrorCode::kUnsupportedEncoding,
                    std::to_string(bits) + "-bit samples; only 16-bit PCM");
      }
      if (layout.channels < 1 || layout.sample_rate <= 0) {
        throw Error(ErrorCode::kUnsupportedEncoding,
                    "bad channel count or sample rate");
      }
      have_format = true;
      pos += size;
      if (size % 2 == 1) {
        in.ignore(1);
        ++pos;
      }
    } else if (std::memcmp(chunk.data(), "data", 4) == 0) {
      if (!have_format) {
        throw Error(ErrorCode::kUnsupportedEncoding,
                    "data chunk precedes fmt chunk");
      }
      if (pos + size > total) {
        throw Truncated("data chunk declares " + std::to_string(size) +
                        " bytes but only " + std::to_string(total - pos) +
                        " follow");
      }
      if (size % (2u * static_cast<unsigned>(layout.channels)) != 0) {
        throw Truncated("data chunk ends mid-frame");
      }
      layout.data_offset = pos;
      layout.data_bytes = size;
      return layout;
    } else {
      const std::uint64_t skip = size + (size % 2);
      if (pos + skip > total) throw Truncated("chunk runs past end of file");
      in.ignore(static_cast<std::streamsize>(skip));
      pos += skip;
    }
  }
}

AudioClip ClipFromPayload(const WavLayout& layout, const char* data) {
  AudioClip clip;
  clip.sample_rate = layout.sample_rate;
  clip.channels = layout.channels;
  clip.samples.resize(layout.data_bytes / 2);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = static_cast<std::int16_t>(Le16(data + 2 * i));
  }
  return clip;
}

}  // namespace

std::size_t FrameAt(Millis t, int sample_rate) {
  const std::int64_t scaled = t.count() * sample_rate;
  const std::int64_t frame =
      scaled >= 0 ? (scaled + 500) / 1000 : -((-scaled + 500) / 1000);
  if (frame < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative time offset");
  }
  return static_cast<std::size_t>(frame);
}

SpanList SpansOf(const SentenceDoc& doc, const Selection& selection) {
  SpanList spans;
  for (std::size_t n = 0; n < selection.indices.size(); ++n) {
    const std::size_t i = selection.indices[n];
    if (i >= doc.size()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "sentence " + std::to_string(i) + " not in " +
                      doc.episode_id + " (" + std::to_string(doc.size()) +
                      " sentences)",
                  i);
    }
    const Sentence& s = doc.sentences[i];
    if (!spans.empty() && s.start >= spans.back().end &&
        s.start - spans.back().end < kSpanMergeGap) {
      spans.back().end = s.end;
    } else {
      spans.push_back({s.start, s.end});
    }
  }
  return spans;
}

AudioClip Stitch(const AudioClip& clip, const SpanList& spans,
                 StitchOptions options) {
  const std::size_t total = clip.frames();
  const auto ch = static_cast<std::size_t>(clip.channels);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  ranges.reserve(spans.size());
  std::size_t out_frames = 0;
  for (std::size_t n = 0; n < spans.size(); ++n) {
    const Span& span = spans[n];
    if (span.start < Millis(0) || span.end <= span.start) {
      throw Error(ErrorCode::kInvalidArgument,
                  "span " + std::to_string(n) + " is empty or negative", n);
    }
    const std::size_t begin = FrameAt(span.start, clip.sample_rate);
    const std::size_t end = FrameAt(span.end, clip.sample_rate);
    if (end > total) {
      throw Error(ErrorCode::kSpanOutOfRange,
                  "span " + std::to_string(n) + " [" +
                      FormatSeconds(span.start) + ", " +
                      FormatSeconds(span.end) + ") s ends past the clip (" +
                      std::to_string(total) + " frames)",
                  n);
    }
    ranges.emplace_back(begin, end);
    out_frames += end - begin;
  }

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.channels = clip.channels;
  const std::size_t fade = options.crossfade > Millis(0)
                               ? FrameAt(options.crossfade, clip.sample_rate)
                               : 0;
  if (fade == 0) {
    out.samples.reserve(out_frames * ch);
    for (const auto& [begin, end] : ranges) {
      out.samples.insert(out.samples.end(), clip.samples.begin() + begin * ch,
                         clip.samples.begin() + end * ch);
    }
    return out;
  }

  std::size_t previous_len = 0;
  for (const auto& [begin, end] : ranges) {
    const std::size_t len = end - begin;
    const std::size_t overlap =
        out.samples.empty() ? 0 : std::min({fade, previous_len, len});
    const std::size_t tail = out.samples.size() - overlap * ch;
    for (std::size_t f = 0; f < overlap; ++f) {
      const double t = static_cast<double>(f + 1) /
                       static_cast<double>(overlap + 1);
      for (std::size_t c = 0; c < ch; ++c) {
        const double a = out.samples[tail + f * ch + c];
        const double b = clip.samples[(begin + f) * ch + c];
        out.samples[tail + f * ch + c] =
            static_cast<std::int16_t>(std::lround(a * (1.0 - t) + b * t));
      }
    }
    out.samples.insert(out.samples.end(),
                       clip.samples.begin() + (begin + overlap) * ch,
                       clip.samples.begin() + end * ch);
    previous_len = len;
  }
  return out;
}

AudioClip DecodeWav(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  const WavLayout layout = ReadLayout(in, bytes.size());
  return ClipFromPayload(layout, bytes.data() + layout.data_offset);
}

std::string EncodeWav(const AudioClip& clip) {
  if (clip.channels < 1 || clip.sample_rate <= 0 ||
      clip.samples.size() % static_cast<std::size_t>(clip.channels) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent audio clip");
  }
  std::string out = Header(clip.sample_rate, clip.channels,
                           clip.samples.size() * 2);
  out.reserve(out.size() + clip.samples.size() * 2);
  for (std::int16_t s : clip.samples) {
    PutLe16(out, static_cast<std::uint16_t>(s));
  }
  return out;
}

AudioClip ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return DecodeWav(buf.str());
}

void WriteWav(const AudioClip& clip, const std::filesystem::path& path) {
  const std::string bytes = EncodeWav(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

WavLayout ProbeWav(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot stat " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ReadLayout(in, size);
}

std::string SliceWav(const std::filesystem::path& path, Span span) {
  const WavLayout layout = ProbeWav(path);
  if (span.start < Millis(0) || span.end <= span.start) {
    throw Error(ErrorCode::kInvalidArgument, "empty or negative span");
  }
  const std::size_t begin = FrameAt(span.start, layout.sample_rate);
  const std::size_t end = FrameAt(span.end, layout.sample_rate);
  if (end > layout.frames()) {
    throw Error(ErrorCode::kSpanOutOfRange,
                "span ends past the audio in " + path.string());
  }
  const std::uint64_t block = 2u * static_cast<unsigned>(layout.channels);
  const std::uint64_t bytes = (end - begin) * block;
  std::string out = Header(layout.sample_rate, layout.channels, bytes);
  const std::size_t header = out.size();
  out.resize(header + bytes);
  std::ifstream in(path, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(layout.data_offset + begin * block));
  if (!in.read(out.data() + header, static_cast<std::streamsize>(bytes))) {
    throw Truncated("short read from " + path.string());
  }
  return out;
}

}  // namespace castdigest
