#include "dycast/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace dycast {
namespace detail {

static_assert(std::endian::native == std::endian::little,
              "serializers assume a little-endian host");

void Reader::read_bytes(void* dst, std::size_t n, const char* what) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    throw FormatError(std::string("truncated payload while reading ") + what, offset_);
  }
  offset_ += n;
}

void Reader::expect_magic(const char magic[4], const char* what) {
  char buf[4];
  read_bytes(buf, 4, what);
  if (std::memcmp(buf, magic, 4) != 0) {
    throw FormatError(std::string("bad magic, expected ") + what, 0);
  }
}

std::uint8_t Reader::read_u8(const char* what) {
  std::uint8_t v;
  read_bytes(&v, 1, what);
  return v;
}

std::uint16_t Reader::read_u16(const char* what) {
  std::uint16_t v;
  read_bytes(&v, 2, what);
  return v;
}

std::uint32_t Reader::read_u32(const char* what) {
  std::uint32_t v;
  read_bytes(&v, 4, what);
  return v;
}

std::uint64_t Reader::read_u64(const char* what) {
  std::uint64_t v;
  read_bytes(&v, 8, what);
  return v;
}

float Reader::read_f32(const char* what) {
  float v;
  read_bytes(&v, 4, what);
  return v;
}

void Reader::expect_eof(const char* what) {
  char extra;
  in_.read(&extra, 1);
  if (in_.gcount() != 0) {
    throw FormatError(std::string("trailing bytes after ") + what, offset_);
  }
}

void Writer::write_bytes(const void* src, std::size_t n) {
  out_.write(static_cast<const char*>(src), static_cast<std::streamsize>(n));
}

void Writer::write_magic(const char magic[4]) { write_bytes(magic, 4); }
void Writer::write_u8(std::uint8_t v) { write_bytes(&v, 1); }
void Writer::write_u16(std::uint16_t v) { write_bytes(&v, 2); }
void Writer::write_u32(std::uint32_t v) { write_bytes(&v, 4); }
void Writer::write_u64(std::uint64_t v) { write_bytes(&v, 8); }
void Writer::write_f32(float v) { write_bytes(&v, 4); }

}  // namespace detail

namespace {

constexpr char kFrameMagic[4] = {'D', 'Y', 'C', 'F'};
constexpr char kTokenMagic[4] = {'D', 'Y', 'C', 'T'};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file " + path, 0);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot create file " + path);
  return out;
}

}  // namespace

void write_frames(std::ostream& out, const FrameSequence& frames) {
  detail::Writer w(out);
  w.write_magic(kFrameMagic);
  w.write_u32(static_cast<std::uint32_t>(frames.num_frames()));
  w.write_u32(static_cast<std::uint32_t>(frames.dim()));
  w.write_f32(static_cast<float>(frames.frame_rate_hz()));
  for (float v : frames.data()) w.write_f32(v);
}

void write_frames(const std::string& path, const FrameSequence& frames) {
  auto out = open_output(path);
  write_frames(out, frames);
  if (!out) throw ValidationError("write failed for " + path);
}

FrameSequence read_frames(std::istream& in) {
  detail::Reader r(in);
  r.expect_magic(kFrameMagic, "DYCF frame file");
  const std::uint32_t num_frames = r.read_u32("frame count");
  const std::uint32_t dim = r.read_u32("dimension");
  const float frame_rate = r.read_f32("frame rate");
  if (num_frames == 0) throw FormatError("frame count must be >= 1", 4);
  if (dim == 0) throw FormatError("dimension must be >= 1", 8);
  if (!(frame_rate > 0.0f) || !std::isfinite(frame_rate)) {
    throw FormatError("frame rate must be positive and finite", 12);
  }
  const std::uint64_t count = static_cast<std::uint64_t>(num_frames) * dim;
  if (count > (std::uint64_t{1} << 31)) {
    throw FormatError("frame payload too large", 4);
  }
  std::vector<float> data(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t offset = r.offset();
    data[i] = r.read_f32("frame values");
    if (!std::isfinite(data[i])) throw FormatError("non-finite frame value", offset);
  }
  r.expect_eof("DYCF payload");
  return FrameSequence(static_cast<int>(num_frames), static_cast<int>(dim),
                       static_cast<double>(frame_rate), std::move(data));
}

FrameSequence read_frames(const std::string& path) {
  auto in = open_input(path);
  return read_frames(in);
}

void write_tokens(std::ostream& out, const TokenSequence& tokens) {
  validate_tokens(tokens);
  detail::Writer w(out);
  w.write_magic(kTokenMagic);
  w.write_u32(static_cast<std::uint32_t>(tokens.num_tokens()));
  w.write_u16(static_cast<std::uint16_t>(tokens.num_streams));
  w.write_u16(static_cast<std::uint16_t>(tokens.num_levels));
  std::uint8_t flags = 0;
  if (tokens.durations) flags |= 0x01;
  if (tokens.total_frames) flags |= 0x02;
  w.write_u8(flags);
  for (std::uint8_t idx : tokens.indices) w.write_u8(idx);
  if (tokens.durations) {
    for (int d : tokens.durations.value()) w.write_u32(static_cast<std::uint32_t>(d));
  }
  if (tokens.total_frames) {
    w.write_u32(static_cast<std::uint32_t>(*tokens.total_frames));
  }
}

void write_tokens(const std::string& path, const TokenSequence& tokens) {
  auto out = open_output(path);
  write_tokens(out, tokens);
  if (!out) throw ValidationError("write failed for " + path);
}

TokenSequence read_tokens(std::istream& in) {
  detail::Reader r(in);
  r.expect_magic(kTokenMagic, "DYCT token file");
  const std::uint32_t num_tokens = r.read_u32("token count");
  const std::uint16_t num_streams = r.read_u16("stream count");
  const std::uint16_t num_levels = r.read_u16("level count");
  const std::uint8_t flags = r.read_u8("flags");
  if (num_tokens == 0) throw FormatError("token count must be >= 1", 4);
  if (num_streams == 0) throw FormatError("stream count must be >= 1", 8);
  if (num_levels < 2 || num_levels > 256) {
    throw FormatError("level count must be in [2, 256]", 10);
  }
  if (flags & ~0x03) throw FormatError("unknown flag bits", 12);

  TokenSequence tokens;
  tokens.num_streams = num_streams;
  tokens.num_levels = num_levels;
  const std::uint64_t count = static_cast<std::uint64_t>(num_tokens) * num_streams;
  if (count > (std::uint64_t{1} << 31)) throw FormatError("token payload too large", 4);
  tokens.indices.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t offset = r.offset();
    tokens.indices[i] = r.read_u8("token indices");
    if (tokens.indices[i] >= num_levels) {
      throw FormatError("token index out of range", offset);
    }
  }
  if (flags & 0x01) {
    DurationVector durations(num_tokens);
    for (std::uint32_t i = 0; i < num_tokens; ++i) {
      const std::uint64_t offset = r.offset();
      const std::uint32_t d = r.read_u32("durations");
      if (d == 0 || d > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
        throw FormatError("duration out of range", offset);
      }
      durations[i] = static_cast<int>(d);
    }
    tokens.durations = std::move(durations);
  }
  if (flags & 0x02) {
    const std::uint64_t offset = r.offset();
    const std::uint32_t total = r.read_u32("total frames");
    if (total == 0 || total > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
      throw FormatError("total frames out of range", offset);
    }
    tokens.total_frames = static_cast<int>(total);
  }
  r.expect_eof("DYCT payload");
  return tokens;
}

TokenSequence read_tokens(const std::string& path) {
  auto in = open_input(path);
  return read_tokens(in);
}

}  // namespace dycast
