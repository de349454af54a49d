#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "dycast/core.hpp"

namespace dycast {

// Binary containers, all little-endian, no padding.
//
// Frame file ("DYCF"): magic | u32 T | u32 D | f32 frame_rate |
//   T*D f32 row-major values.
// Token file ("DYCT"): magic | u32 N | u16 L | u16 K |
//   u8 flags (bit0 durations, bit1 total_frames) | N*L u8 indices |
//   [N u32 durations] | [u32 total_frames].

void write_frames(std::ostream& out, const FrameSequence& frames);
void write_frames(const std::string& path, const FrameSequence& frames);
FrameSequence read_frames(std::istream& in);
FrameSequence read_frames(const std::string& path);

void write_tokens(std::ostream& out, const TokenSequence& tokens);
void write_tokens(const std::string& path, const TokenSequence& tokens);
TokenSequence read_tokens(std::istream& in);
TokenSequence read_tokens(const std::string& path);

namespace detail {

// Little-endian primitives shared by every container reader/writer.
// Readers throw FormatError carrying the offset of the failing field.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint64_t offset() const { return offset_; }
  void expect_magic(const char magic[4], const char* what);
  std::uint8_t read_u8(const char* what);
  std::uint16_t read_u16(const char* what);
  std::uint32_t read_u32(const char* what);
  std::uint64_t read_u64(const char* what);
  float read_f32(const char* what);
  void expect_eof(const char* what);

 private:
  void read_bytes(void* dst, std::size_t n, const char* what);
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void write_magic(const char magic[4]);
  void write_u8(std::uint8_t v);
  void write_u16(std::uint16_t v);
  void write_u32(std::uint32_t v);
  void write_u64(std::uint64_t v);
  void write_f32(float v);

 private:
  void write_bytes(const void* src, std::size_t n);
  std::ostream& out_;
};

}  // namespace detail
}  // namespace dycast
