#include "dycast/core.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace dycast {

FrameSequence::FrameSequence(int num_frames, int dim, double frame_rate_hz)
    : FrameSequence(num_frames, dim, frame_rate_hz,
                    std::vector<float>(static_cast<std::size_t>(num_frames) * dim, 0.0f)) {}

FrameSequence::FrameSequence(int num_frames, int dim, double frame_rate_hz,
                             std::vector<float> data)
    : num_frames_(num_frames), dim_(dim), frame_rate_hz_(frame_rate_hz),
      data_(std::move(data)) {
  if (num_frames_ < 1) throw ValidationError("FrameSequence: num_frames must be >= 1");
  if (dim_ < 1) throw ValidationError("FrameSequence: dim must be >= 1");
  if (!(frame_rate_hz_ > 0.0)) {
    throw ValidationError("FrameSequence: frame_rate_hz must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(num_frames_) * dim_) {
    throw ValidationError("FrameSequence: data size does not match T*D");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw ValidationError("FrameSequence: non-finite value");
  }
}

std::span<const float> FrameSequence::row(int t) const {
  return {data_.data() + static_cast<std::size_t>(t) * dim_, static_cast<std::size_t>(dim_)};
}

std::span<float> FrameSequence::row(int t) {
  return {data_.data() + static_cast<std::size_t>(t) * dim_, static_cast<std::size_t>(dim_)};
}

void validate_boundaries(const BoundarySet& b, int num_frames) {
  if (b.ends.empty()) throw ValidationError("BoundarySet: at least one chunk required");
  int prev = -1;
  for (int e : b.ends) {
    if (e <= prev) throw ValidationError("BoundarySet: ends must be strictly increasing");
    if (e >= num_frames) throw ValidationError("BoundarySet: end index past sequence length");
    prev = e;
  }
  if (b.ends.back() != num_frames - 1) {
    throw ValidationError("BoundarySet: last end must equal T-1");
  }
}

void validate_durations(const DurationVector& d) {
  if (d.empty()) throw ValidationError("DurationVector: at least one duration required");
  for (int v : d) {
    if (v < 1) throw ValidationError("DurationVector: durations must be >= 1");
  }
}

DurationVector boundaries_to_durations(const BoundarySet& b, int num_frames) {
  validate_boundaries(b, num_frames);
  DurationVector d;
  d.reserve(b.ends.size());
  int prev = -1;
  for (int e : b.ends) {
    d.push_back(e - prev);
    prev = e;
  }
  return d;
}

BoundarySet durations_to_boundaries(const DurationVector& d) {
  validate_durations(d);
  BoundarySet b;
  b.ends.reserve(d.size());
  long long end = -1;
  for (int v : d) {
    end += v;
    if (end > std::numeric_limits<int>::max()) {
      throw ValidationError("durations_to_boundaries: total length overflows");
    }
    b.ends.push_back(static_cast<int>(end));
  }
  return b;
}

std::span<const std::uint8_t> TokenSequence::token(int i) const {
  return {indices.data() + static_cast<std::size_t>(i) * num_streams,
          static_cast<std::size_t>(num_streams)};
}

void validate_tokens(const TokenSequence& t) {
  if (t.num_streams < 1) throw ValidationError("TokenSequence: num_streams must be >= 1");
  if (t.num_levels < 2) throw ValidationError("TokenSequence: num_levels must be >= 2");
  if (t.num_levels > 256) throw ValidationError("TokenSequence: num_levels must be <= 256");
  if (t.indices.size() % static_cast<std::size_t>(t.num_streams) != 0) {
    throw ValidationError("TokenSequence: index count not a multiple of num_streams");
  }
  if (t.indices.empty()) throw ValidationError("TokenSequence: at least one token required");
  for (std::uint8_t idx : t.indices) {
    if (idx >= t.num_levels) throw ValidationError("TokenSequence: index out of range");
  }
  if (t.durations) {
    validate_durations(*t.durations);
    if (static_cast<int>(t.durations->size()) != t.num_tokens()) {
      throw ValidationError("TokenSequence: durations length must equal num_tokens");
    }
  }
  if (t.total_frames && *t.total_frames < 1) {
    throw ValidationError("TokenSequence: total_frames must be >= 1");
  }
}

CodecRates compute_rates(double tokens_per_second, int num_streams,
                         int num_levels, int max_duration) {
  if (!(tokens_per_second > 0.0)) {
    throw ValidationError("compute_rates: tokens_per_second must be positive");
  }
  if (num_streams < 1) throw ValidationError("compute_rates: num_streams must be >= 1");
  if (num_levels < 2) throw ValidationError("compute_rates: num_levels must be >= 2");
  if (max_duration < 1) throw ValidationError("compute_rates: max_duration must be >= 1");

  CodecRates rates;
  rates.frame_rate_hz = tokens_per_second;
  rates.bits_per_token = num_streams * std::log2(static_cast<double>(num_levels));
  rates.bitrate_bps = tokens_per_second * rates.bits_per_token;
  const int duration_bits =
      std::bit_width(static_cast<unsigned>(max_duration) - 1u);  // ceil(log2)
  rates.duration_overhead_bps = tokens_per_second * duration_bits;
  return rates;
}

}  // namespace dycast
