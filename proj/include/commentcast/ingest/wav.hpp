#pragma once

#include "commentcast/error.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

namespace commentcast {

// Interleaved 16-bit PCM.
struct PcmAudio {
  int sample_rate = 44100;
  int channels = 1;
  std::vector<std::int16_t> samples;

  std::size_t frames() const { return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0; }
  double duration_s() const { return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0; }
  std::int64_t duration_ms() const {
    return sample_rate > 0 ? static_cast<std::int64_t>(frames()) * 1000 / sample_rate : 0;
  }
  bool operator==(const PcmAudio&) const = default;
};

namespace wav {

namespace detail {

inline std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
inline std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}
inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace detail

// RIFF WAVE, 16-bit little-endian PCM only (plain or WAVE_FORMAT_EXTENSIBLE).
inline PcmAudio decode(std::span<const std::uint8_t> bytes) {
  using detail::read_u16;
  using detail::read_u32;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::InvalidAudio, "not a RIFF WAVE stream");
  }
  PcmAudio audio;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const auto* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > available) throw Error(ErrorCode::InvalidAudio, "truncated fmt chunk");
      std::uint16_t format = read_u16(chunk + 8);
      if (format == detail::kFormatExtensible && size >= 40) format = read_u16(chunk + 8 + 24);
      audio.channels = read_u16(chunk + 10);
      audio.sample_rate = static_cast<int>(read_u32(chunk + 12));
      const std::uint16_t bits = read_u16(chunk + 22);
      if (format != detail::kFormatPcm || bits != 16) {
        throw Error(ErrorCode::InvalidAudio, "only 16-bit PCM is supported");
      }
      if (audio.channels < 1 || audio.sample_rate <= 0) throw Error(ErrorCode::InvalidAudio, "bad fmt chunk");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::InvalidAudio, "data chunk before fmt chunk");
      // Streaming writers sometimes leave the size at 0 or 0xFFFFFFFF.
      const std::size_t n = (size == 0 || size > available) ? available : size;
      const std::size_t count = n / 2 / audio.channels * audio.channels;
      audio.samples.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        audio.samples[k] = static_cast<std::int16_t>(read_u16(bytes.data() + body + 2 * k));
      }
      have_data = true;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) throw Error(ErrorCode::InvalidAudio, "missing fmt or data chunk");
  return audio;
}

inline std::vector<std::uint8_t> encode(const PcmAudio& audio) {
  using detail::put_u16;
  using detail::put_u32;
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, detail::kFormatPcm);
  put_u16(out, static_cast<std::uint16_t>(audio.channels));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate * audio.channels * 2));
  put_u16(out, static_cast<std::uint16_t>(audio.channels * 2));
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (std::int16_t s : audio.samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline PcmAudio read_file(const std::filesystem::path& path) { return decode(read_bytes(path)); }

inline void write_file(const std::filesystem::path& path, const PcmAudio& audio) {
  const auto bytes = encode(audio);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace wav
}  // namespace commentcast
