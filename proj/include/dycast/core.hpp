#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dycast/errors.hpp"

namespace dycast {

// Per-token frame counts, each >= 1. Paired with a frame sequence of length T
// they satisfy sum(d) == T.
using DurationVector = std::vector<int>;

// A T x D matrix of frame-level features at a fixed base frame rate.
// Doubles as the generic dense-matrix container for latents and pools.
class FrameSequence {
 public:
  FrameSequence() = default;
  FrameSequence(int num_frames, int dim, double frame_rate_hz);
  FrameSequence(int num_frames, int dim, double frame_rate_hz,
                std::vector<float> data);

  int num_frames() const { return num_frames_; }
  int dim() const { return dim_; }
  double frame_rate_hz() const { return frame_rate_hz_; }

  std::span<const float> row(int t) const;
  std::span<float> row(int t);
  float at(int t, int d) const { return data_[static_cast<std::size_t>(t) * dim_ + d]; }
  float& at(int t, int d) { return data_[static_cast<std::size_t>(t) * dim_ + d]; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  int num_frames_ = 0;
  int dim_ = 0;
  double frame_rate_hz_ = 0.0;
  std::vector<float> data_;  // row-major
};

// Strictly increasing inclusive chunk-end frame indices; the last entry is
// T-1, so chunk i spans [ends[i-1]+1, ends[i]].
struct BoundarySet {
  std::vector<int> ends;

  int num_chunks() const { return static_cast<int>(ends.size()); }
};

// Throws ValidationError unless b is a valid boundary set for a sequence of
// length num_frames.
void validate_boundaries(const BoundarySet& b, int num_frames);

// Throws ValidationError unless every duration is >= 1.
void validate_durations(const DurationVector& d);

DurationVector boundaries_to_durations(const BoundarySet& b, int num_frames);
BoundarySet durations_to_boundaries(const DurationVector& d);

// N tokens of L per-dimension level indices in {0..K-1}, with optional
// per-token durations and optional total frame count side information.
struct TokenSequence {
  int num_streams = 0;   // L
  int num_levels = 0;    // K, at most 256 so indices fit the token container
  std::vector<std::uint8_t> indices;  // N x L row-major
  std::optional<DurationVector> durations;
  std::optional<int> total_frames;

  int num_tokens() const {
    return num_streams > 0 ? static_cast<int>(indices.size()) / num_streams : 0;
  }
  std::span<const std::uint8_t> token(int i) const;
};

// Throws ValidationError unless shapes, index ranges, and side-info lengths
// are consistent.
void validate_tokens(const TokenSequence& t);

struct CodecRates {
  double frame_rate_hz = 0.0;          // tokens per second
  double bits_per_token = 0.0;         // L * log2(K)
  double bitrate_bps = 0.0;            // frame_rate_hz * bits_per_token
  double duration_overhead_bps = 0.0;  // fixed-width duration side info
};

// Rate accounting for a token stream emitted at tokens_per_second with L
// streams of K levels. The duration side channel is costed at
// ceil(log2(max_duration)) bits per token.
CodecRates compute_rates(double tokens_per_second, int num_streams,
                         int num_levels, int max_duration);

}  // namespace dycast
