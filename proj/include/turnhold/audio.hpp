#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "turnhold/error.hpp"
#include "turnhold/speaker.hpp"

namespace turnhold {

// Two-speaker audio, one float channel per speaker, samples in [-1, 1].
// Channel 0 is speaker A, channel 1 is speaker B.
struct AudioChannelPair {
  int sample_rate = 0;
  std::array<std::vector<float>, 2> channels;

  std::size_t frames() const { return channels[0].size(); }
  double duration() const {
    return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0;
  }
  std::vector<float>& of(Speaker s) { return channels[static_cast<std::size_t>(index(s))]; }
  const std::vector<float>& of(Speaker s) const {
    return channels[static_cast<std::size_t>(index(s))];
  }
};

struct WavData {
  int sample_rate = 0;
  int channels = 0;
  std::vector<float> samples;  // interleaved, [-1, 1]

  std::size_t frames() const { return channels > 0 ? samples.size() / channels : 0; }
};

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

// Reads a PCM-16 WAV file. Unknown RIFF chunks are skipped; anything that is
// not 16-bit integer PCM is rejected.
inline WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open audio file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw DataError(path.string() + ": not a RIFF/WAVE file");

  WavData wav;
  int bits = 0;
  bool have_fmt = false, have_data = false;
  std::size_t off = 12;
  while (off + 8 <= n) {
    const char* id = bytes.data() + off;
    const std::uint32_t size = detail::read_u32le(p + off + 4);
    const std::size_t body = off + 8;
    if (body + size > n) throw DataError(path.string() + ": truncated chunk");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw DataError(path.string() + ": malformed fmt chunk");
      const std::uint16_t format = detail::read_u16le(p + body);
      wav.channels = detail::read_u16le(p + body + 2);
      wav.sample_rate = static_cast<int>(detail::read_u32le(p + body + 4));
      bits = detail::read_u16le(p + body + 14);
      if (format != 1 || bits != 16)
        throw DataError(path.string() + ": only PCM-16 WAV is supported");
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw DataError(path.string() + ": data chunk before fmt");
      const std::size_t count = size / 2;
      wav.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::int16_t v =
            static_cast<std::int16_t>(detail::read_u16le(p + body + 2 * i));
        wav.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      have_data = true;
    }
    off = body + size + (size & 1);  // chunks are word-aligned
  }
  if (!have_fmt || !have_data) throw DataError(path.string() + ": missing fmt or data chunk");
  if (wav.channels < 1 || wav.channels > 2)
    throw DataError(path.string() + ": expected 1 or 2 channels");
  if (wav.samples.size() % wav.channels != 0)
    throw DataError(path.string() + ": sample count not divisible by channel count");
  return wav;
}

// Writes interleaved samples as PCM-16. Values are scaled by 32768 and
// clamped, so read_wav(write_wav(x)) returns multiples of 1/32768 exactly.
inline void write_wav(const std::filesystem::path& path, int sample_rate, int channels,
                      std::span<const float> interleaved) {
  if (channels < 1 || channels > 2) throw UsageError("write_wav: channels must be 1 or 2");
  std::string out;
  const std::uint32_t data_size = static_cast<std::uint32_t>(interleaved.size() * 2);
  out.reserve(44 + data_size);
  out.append("RIFF");
  detail::put_u32le(out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);  // PCM
  detail::put_u16le(out, static_cast<std::uint16_t>(channels));
  detail::put_u32le(out, static_cast<std::uint32_t>(sample_rate));
  detail::put_u32le(out, static_cast<std::uint32_t>(sample_rate * channels * 2));
  detail::put_u16le(out, static_cast<std::uint16_t>(channels * 2));
  detail::put_u16le(out, 16);
  out.append("data");
  detail::put_u32le(out, data_size);
  for (float x : interleaved) {
    long v = std::lround(static_cast<double>(x) * 32768.0);
    if (v > 32767) v = 32767;
    if (v < -32768) v = -32768;
    detail::put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write audio file " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write to " + path.string());
}

inline void write_wav_stereo(const std::filesystem::path& path, const AudioChannelPair& audio) {
  std::vector<float> interleaved(audio.frames() * 2);
  for (std::size_t i = 0; i < audio.frames(); ++i) {
    interleaved[2 * i] = audio.channels[0][i];
    interleaved[2 * i + 1] = audio.channels[1][i];
  }
  write_wav(path, audio.sample_rate, 2, interleaved);
}

}  // namespace turnhold
