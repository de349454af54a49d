#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dycast/core.hpp"
#include "dycast/duration.hpp"
#include "dycast/hazard.hpp"
#include "dycast/rad.hpp"
#include "dycast/ssq.hpp"

namespace dycast {

// Stand-in for the learned feature compressor: a fixed seeded projection
// with orthonormal columns, so compress is the transposed projection plus
// unit normalization and decompress is its adjoint.
class ToyCompressor {
 public:
  ToyCompressor(int input_dim, int latent_dim, std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  int latent_dim() const { return latent_dim_; }

  // Unit-norm latent of the frame.
  std::vector<double> compress(std::span<const float> frame) const;
  std::vector<float> decompress(std::span<const double> latent) const;

 private:
  int input_dim_;
  int latent_dim_;
  std::vector<double> basis_;  // input_dim x latent_dim, orthonormal columns
};

struct PipelineConfig {
  enum class BoundarySource { provided, hazard };
  enum class DecodeMode { tokens_and_durations, tokens_and_length, tokens_only };

  BoundarySource boundary_source = BoundarySource::provided;
  DecodeMode mode = DecodeMode::tokens_and_durations;
  SsqConfig ssq;
  BoundaryDecodeConfig boundary_decode;
  int feature_dim = 0;              // original D; 0 lets encode adopt its input
  double base_rate_hz = 50.0;
  std::uint64_t compressor_seed = 0;
  bool identity_quantizer = false;  // bypass SSQ, round-trip testing only
  std::optional<RadConfig> rad;
};

struct EncodeResult {
  TokenSequence tokens;
  BoundarySet boundaries;
  // Continuous unit-norm token latents, kept for the identity-quantizer
  // path and for building self pools.
  std::vector<std::vector<double>> latents;
};

// features -> boundaries -> last-frame downsample -> compress -> quantize,
// with duration / utterance-length side info attached per decode mode.
EncodeResult encode(const FrameSequence& features, const BoundarySet& boundaries,
                    const PipelineConfig& cfg);
EncodeResult encode(const FrameSequence& features, const HazardSequence& hazard,
                    const PipelineConfig& cfg);

struct DecodeOptions {
  // Free-mean durations per token, required for the budget and free modes.
  std::optional<DurationParams> duration_params;
  // Overrides the transmitted utterance length in budget mode.
  std::optional<int> target_frames;
  const IvfIndex* rad_index = nullptr;
};

// tokens -> dequantize -> optional retrieval replacement -> decompress ->
// duration-driven upsample.
FrameSequence decode(const TokenSequence& tokens, const PipelineConfig& cfg,
                     const DecodeOptions& options = {});

// Identity-quantizer variant decoding continuous latents directly.
FrameSequence decode_latents(const std::vector<std::vector<double>>& latents,
                             const DurationVector& durations, const PipelineConfig& cfg,
                             const DecodeOptions& options = {});

// Rates for a token stream measured against its base frame rate:
// tokens_per_second = N / (total_frames / base_rate).
CodecRates report_rates(const TokenSequence& tokens, double base_rate_hz,
                        int num_streams, int num_levels, int max_duration);

// Synthetic corpora for desk-scale verification.

// Piecewise-constant features with a boundary planted every `period` frames;
// rows live in the compressor's range so encode/decode round trips are
// lossless up to float rounding.
struct PeriodicSynth {
  FrameSequence features;
  BoundarySet boundaries;
};

PeriodicSynth synth_periodic(int num_frames, int period, int feature_dim,
                             int latent_dim, double frame_rate_hz, std::uint64_t seed);

// d_min + NB(mu, alpha) duration draws.
DurationVector synth_nb_durations(double mu, double alpha, int d_min, int count,
                                  std::uint64_t seed);

// Unit-norm latents in well-separated clusters (id "c<cluster>_<n>").
LatentPool synth_clustered_latents(int num_clusters, int count, int latent_dim,
                                   double noise, std::uint64_t seed);

}  // namespace dycast
