#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "turnhold/error.hpp"
#include "turnhold/vap.hpp"

namespace turnhold {

// Little-endian stream formats for predictor output.
//
//   VAPD v1: "VAPD" | u32 version=1 | f32 frame_rate | u32 n_frames
//            | n_frames * 256 f32 label probabilities
//   VAPT v1: "VAPT" | u32 version=1 | f32 frame_rate | u32 n_frames
//            | n_frames * 1 f32 turn-hold probabilities
struct WireBlock {
  double frame_rate = 0;
  std::size_t n_frames = 0;
  bool thp_only = false;          // true for VAPT
  std::vector<float> data;        // n_frames * (thp_only ? 1 : 256)
};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "wire codec assumes a little-endian host");

inline void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

inline void put_f32(std::string& out, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

struct WireCursor {
  std::span<const char> buf;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) {
    if (pos + n > buf.size())
      throw DataError(std::string("truncated stream: expected ") + what);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, buf.data() + pos, 4);
    pos += 4;
    return v;
  }
  float f32(const char* what) {
    need(4, what);
    float v;
    std::memcpy(&v, buf.data() + pos, 4);
    pos += 4;
    return v;
  }
};

}  // namespace detail

inline std::string serialize_wire(const WireBlock& block) {
  const std::size_t per_frame = block.thp_only ? 1 : static_cast<std::size_t>(kNumLabels);
  if (block.data.size() != block.n_frames * per_frame)
    throw UsageError("wire block payload size disagrees with its frame count");
  std::string out;
  out.reserve(16 + 4 * block.data.size());
  out.append(block.thp_only ? "VAPT" : "VAPD", 4);
  detail::put_u32(out, 1);
  detail::put_f32(out, static_cast<float>(block.frame_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(block.n_frames));
  for (float v : block.data) detail::put_f32(out, v);
  return out;
}

inline WireBlock parse_wire(std::span<const char> bytes) {
  detail::WireCursor cur{bytes};
  cur.need(4, "magic");
  const std::string magic(bytes.data(), 4);
  cur.pos = 4;
  WireBlock block;
  if (magic == "VAPD")
    block.thp_only = false;
  else if (magic == "VAPT")
    block.thp_only = true;
  else
    throw DataError("bad magic \"" + magic + "\", expected VAPD or VAPT");
  const std::uint32_t version = cur.u32("version");
  if (version != 1)
    throw DataError("unsupported " + magic + " version " + std::to_string(version));
  block.frame_rate = static_cast<double>(cur.f32("frame rate"));
  if (!(block.frame_rate > 0)) throw DataError(magic + " stream has a non-positive frame rate");
  block.n_frames = cur.u32("frame count");
  const std::size_t per_frame = block.thp_only ? 1 : static_cast<std::size_t>(kNumLabels);
  cur.need(block.n_frames * per_frame * 4, "payload");
  block.data.resize(block.n_frames * per_frame);
  if (!block.data.empty())
    std::memcpy(block.data.data(), bytes.data() + cur.pos, block.data.size() * 4);
  return block;
}

inline WireBlock read_wire_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_wire(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline void write_wire_file(const std::filesystem::path& path, const WireBlock& block) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = serialize_wire(block);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace turnhold
