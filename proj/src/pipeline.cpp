#include "dycast/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "dycast/chunking.hpp"
#include "dycast/random.hpp"

namespace dycast {

ToyCompressor::ToyCompressor(int input_dim, int latent_dim, std::uint64_t seed)
    : input_dim_(input_dim), latent_dim_(latent_dim) {
  if (latent_dim_ < 1) throw ValidationError("ToyCompressor: latent_dim must be >= 1");
  if (input_dim_ < latent_dim_) {
    throw ValidationError("ToyCompressor: input_dim must be >= latent_dim");
  }
  basis_.resize(static_cast<std::size_t>(input_dim_) * latent_dim_);
  Rng rng(seed);
  for (double& v : basis_) v = rng.next_gaussian();
  // Modified Gram-Schmidt over columns.
  for (int c = 0; c < latent_dim_; ++c) {
    for (int prev = 0; prev < c; ++prev) {
      double proj = 0.0;
      for (int r = 0; r < input_dim_; ++r) {
        proj += basis_[static_cast<std::size_t>(r) * latent_dim_ + c] *
                basis_[static_cast<std::size_t>(r) * latent_dim_ + prev];
      }
      for (int r = 0; r < input_dim_; ++r) {
        basis_[static_cast<std::size_t>(r) * latent_dim_ + c] -=
            proj * basis_[static_cast<std::size_t>(r) * latent_dim_ + prev];
      }
    }
    double sq = 0.0;
    for (int r = 0; r < input_dim_; ++r) {
      const double v = basis_[static_cast<std::size_t>(r) * latent_dim_ + c];
      sq += v * v;
    }
    if (!(sq > 1e-12)) {
      throw ValidationError("ToyCompressor: degenerate random basis");
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (int r = 0; r < input_dim_; ++r) {
      basis_[static_cast<std::size_t>(r) * latent_dim_ + c] *= inv;
    }
  }
}

std::vector<double> ToyCompressor::compress(std::span<const float> frame) const {
  if (static_cast<int>(frame.size()) != input_dim_) {
    throw ValidationError("ToyCompressor::compress: frame dimension mismatch");
  }
  std::vector<double> latent(latent_dim_, 0.0);
  for (int r = 0; r < input_dim_; ++r) {
    const double x = frame[r];
    for (int c = 0; c < latent_dim_; ++c) {
      latent[c] += basis_[static_cast<std::size_t>(r) * latent_dim_ + c] * x;
    }
  }
  double sq = 0.0;
  for (double v : latent) sq += v * v;
  if (!(sq > 1e-24)) {
    throw ValidationError("ToyCompressor::compress: frame projects to zero latent");
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : latent) v *= inv;
  return latent;
}

std::vector<float> ToyCompressor::decompress(std::span<const double> latent) const {
  if (static_cast<int>(latent.size()) != latent_dim_) {
    throw ValidationError("ToyCompressor::decompress: latent dimension mismatch");
  }
  std::vector<float> frame(input_dim_, 0.0f);
  for (int r = 0; r < input_dim_; ++r) {
    double sum = 0.0;
    for (int c = 0; c < latent_dim_; ++c) {
      sum += basis_[static_cast<std::size_t>(r) * latent_dim_ + c] * latent[c];
    }
    frame[r] = static_cast<float>(sum);
  }
  return frame;
}

namespace {

EncodeResult encode_with_boundaries(const FrameSequence& features,
                                    const BoundarySet& boundaries,
                                    const PipelineConfig& cfg) {
  validate_boundaries(boundaries, features.num_frames());
  validate_ssq_config(cfg.ssq);
  if (cfg.feature_dim > 0 && cfg.feature_dim != features.dim()) {
    throw ValidationError("encode: configured feature_dim does not match input");
  }

  const FrameSequence token_level = downsample(features, boundaries);
  const ToyCompressor compressor(features.dim(), cfg.ssq.latent_dim, cfg.compressor_seed);

  EncodeResult result;
  result.boundaries = boundaries;
  result.tokens.num_streams = cfg.ssq.latent_dim;
  result.tokens.num_levels = cfg.ssq.num_levels;
  result.tokens.indices.reserve(static_cast<std::size_t>(token_level.num_frames()) *
                                cfg.ssq.latent_dim);
  result.latents.reserve(token_level.num_frames());
  for (int i = 0; i < token_level.num_frames(); ++i) {
    auto latent = compressor.compress(token_level.row(i));
    const auto indices = ssq_quantize(cfg.ssq, latent);
    for (int idx : indices) result.tokens.indices.push_back(static_cast<std::uint8_t>(idx));
    result.latents.push_back(std::move(latent));
  }

  switch (cfg.mode) {
    case PipelineConfig::DecodeMode::tokens_and_durations:
      result.tokens.durations = boundaries_to_durations(boundaries, features.num_frames());
      break;
    case PipelineConfig::DecodeMode::tokens_and_length:
      result.tokens.total_frames = features.num_frames();
      break;
    case PipelineConfig::DecodeMode::tokens_only:
      break;
  }
  return result;
}

DurationVector resolve_durations(const TokenSequence& tokens, const PipelineConfig& cfg,
                                 const DecodeOptions& options, int num_tokens) {
  switch (cfg.mode) {
    case PipelineConfig::DecodeMode::tokens_and_durations: {
      if (!tokens.durations) {
        throw ValidationError("decode: durations side info required for this mode");
      }
      return *tokens.durations;
    }
    case PipelineConfig::DecodeMode::tokens_and_length: {
      int target = 0;
      if (options.target_frames) {
        target = *options.target_frames;
      } else if (tokens.total_frames) {
        target = *tokens.total_frames;
      } else {
        throw ValidationError("decode: utterance length required for this mode");
      }
      if (!options.duration_params) {
        throw ValidationError("decode: duration parameters required for this mode");
      }
      DurationParams params = *options.duration_params;
      if (params.num_tokens() != num_tokens) {
        throw ValidationError("decode: duration parameters must cover every token");
      }
      return decode_budget(params, target);
    }
    case PipelineConfig::DecodeMode::tokens_only: {
      if (!options.duration_params) {
        throw ValidationError("decode: duration parameters required for this mode");
      }
      DurationParams params = *options.duration_params;
      if (params.num_tokens() != num_tokens) {
        throw ValidationError("decode: duration parameters must cover every token");
      }
      return decode_free(params);
    }
  }
  throw ValidationError("decode: unknown decode mode");
}

FrameSequence latents_to_rows(const std::vector<std::vector<double>>& latents,
                              int dim, double frame_rate) {
  FrameSequence rows(static_cast<int>(latents.size()), dim, frame_rate);
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (static_cast<int>(latents[i].size()) != dim) {
      throw ValidationError("decode: latent dimension mismatch");
    }
    for (int d = 0; d < dim; ++d) {
      rows.at(static_cast<int>(i), d) = static_cast<float>(latents[i][d]);
    }
  }
  return rows;
}

FrameSequence decode_latents_impl(const std::vector<std::vector<double>>& latents,
                                  const DurationVector& durations,
                                  const PipelineConfig& cfg,
                                  const DecodeOptions& options) {
  if (latents.empty()) throw ValidationError("decode: at least one token required");
  if (latents.size() != durations.size()) {
    throw ValidationError("decode: one duration per token required");
  }
  validate_durations(durations);
  if (cfg.feature_dim < 1) {
    throw ValidationError("decode: feature_dim must be configured for decompression");
  }

  FrameSequence token_latents = latents_to_rows(latents, cfg.ssq.latent_dim,
                                                cfg.base_rate_hz);
  if (cfg.rad) {
    if (!options.rad_index) {
      throw ValidationError("decode: retrieval configured but no index supplied");
    }
    token_latents = rad_apply(token_latents, *options.rad_index, *cfg.rad).latents;
  }

  const ToyCompressor compressor(cfg.feature_dim, cfg.ssq.latent_dim, cfg.compressor_seed);
  FrameSequence token_features(token_latents.num_frames(), cfg.feature_dim,
                               cfg.base_rate_hz);
  std::vector<double> latent(cfg.ssq.latent_dim);
  for (int i = 0; i < token_latents.num_frames(); ++i) {
    for (int d = 0; d < cfg.ssq.latent_dim; ++d) latent[d] = token_latents.at(i, d);
    const std::vector<float> frame = compressor.decompress(latent);
    std::copy(frame.begin(), frame.end(), token_features.row(i).begin());
  }
  return upsample(token_features, durations);
}

}  // namespace

EncodeResult encode(const FrameSequence& features, const BoundarySet& boundaries,
                    const PipelineConfig& cfg) {
  return encode_with_boundaries(features, boundaries, cfg);
}

EncodeResult encode(const FrameSequence& features, const HazardSequence& hazard,
                    const PipelineConfig& cfg) {
  if (hazard.num_frames() != features.num_frames()) {
    throw ValidationError("encode: hazard length must match feature length");
  }
  const BoundarySet boundaries = decode_boundaries(hazard, cfg.boundary_decode);
  return encode_with_boundaries(features, boundaries, cfg);
}

FrameSequence decode(const TokenSequence& tokens, const PipelineConfig& cfg,
                     const DecodeOptions& options) {
  validate_tokens(tokens);
  validate_ssq_config(cfg.ssq);
  if (tokens.num_streams != cfg.ssq.latent_dim || tokens.num_levels != cfg.ssq.num_levels) {
    throw ValidationError("decode: token shape does not match quantizer config");
  }

  std::vector<std::vector<double>> latents;
  latents.reserve(tokens.num_tokens());
  for (int i = 0; i < tokens.num_tokens(); ++i) {
    std::vector<int> indices(tokens.token(i).begin(), tokens.token(i).end());
    latents.push_back(ssq_dequantize(cfg.ssq, indices));
  }
  const DurationVector durations = resolve_durations(tokens, cfg, options,
                                                     tokens.num_tokens());
  return decode_latents_impl(latents, durations, cfg, options);
}

FrameSequence decode_latents(const std::vector<std::vector<double>>& latents,
                             const DurationVector& durations, const PipelineConfig& cfg,
                             const DecodeOptions& options) {
  if (!cfg.identity_quantizer) {
    throw ValidationError(
        "decode_latents bypasses the quantizer; enable identity_quantizer");
  }
  return decode_latents_impl(latents, durations, cfg, options);
}

CodecRates report_rates(const TokenSequence& tokens, double base_rate_hz,
                        int num_streams, int num_levels, int max_duration) {
  if (!(base_rate_hz > 0.0)) {
    throw ValidationError("report_rates: base_rate_hz must be positive");
  }
  if (!tokens.total_frames && !tokens.durations) {
    throw ValidationError("report_rates: token stream carries no frame count");
  }
  int total = 0;
  if (tokens.total_frames) {
    total = *tokens.total_frames;
  } else {
    for (int d : *tokens.durations) total += d;
  }
  const double seconds = static_cast<double>(total) / base_rate_hz;
  const double tokens_per_second = static_cast<double>(tokens.num_tokens()) / seconds;
  return compute_rates(tokens_per_second, num_streams, num_levels, max_duration);
}

PeriodicSynth synth_periodic(int num_frames, int period, int feature_dim,
                             int latent_dim, double frame_rate_hz, std::uint64_t seed) {
  if (num_frames < 1) throw ValidationError("synth_periodic: num_frames must be >= 1");
  if (period < 1) throw ValidationError("synth_periodic: period must be >= 1");

  PeriodicSynth out;
  for (int e = period - 1; e < num_frames; e += period) out.boundaries.ends.push_back(e);
  if (out.boundaries.ends.empty() || out.boundaries.ends.back() != num_frames - 1) {
    out.boundaries.ends.push_back(num_frames - 1);
  }

  const ToyCompressor compressor(feature_dim, latent_dim, seed);
  Rng rng = Rng(seed).split(1);
  out.features = FrameSequence(num_frames, feature_dim, frame_rate_hz);
  int start = 0;
  for (int chunk = 0; chunk < out.boundaries.num_chunks(); ++chunk) {
    // One unit-norm latent per chunk, expanded through the basis so every
    // frame sits in the compressor's range.
    std::vector<double> latent(latent_dim);
    double sq = 0.0;
    for (double& v : latent) {
      v = rng.next_gaussian();
      sq += v * v;
    }
    const double inv = 1.0 / std::sqrt(std::max(sq, 1e-12));
    for (double& v : latent) v *= inv;
    const std::vector<float> frame = compressor.decompress(latent);
    for (int t = start; t <= out.boundaries.ends[chunk]; ++t) {
      std::copy(frame.begin(), frame.end(), out.features.row(t).begin());
    }
    start = out.boundaries.ends[chunk] + 1;
  }
  return out;
}

DurationVector synth_nb_durations(double mu, double alpha, int d_min, int count,
                                  std::uint64_t seed) {
  if (count < 1) throw ValidationError("synth_nb_durations: count must be >= 1");
  if (d_min < 1) throw ValidationError("synth_nb_durations: d_min must be >= 1");
  Rng rng(seed);
  DurationVector out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(d_min + static_cast<int>(rng.next_negative_binomial(mu, alpha)));
  }
  return out;
}

LatentPool synth_clustered_latents(int num_clusters, int count, int latent_dim,
                                   double noise, std::uint64_t seed) {
  if (num_clusters < 1 || count < num_clusters) {
    throw ValidationError("synth_clustered_latents: need count >= num_clusters >= 1");
  }
  if (latent_dim < 2) throw ValidationError("synth_clustered_latents: latent_dim must be >= 2");
  Rng rng(seed);

  std::vector<std::vector<double>> centers(num_clusters, std::vector<double>(latent_dim));
  for (auto& center : centers) {
    double sq = 0.0;
    for (double& v : center) {
      v = rng.next_gaussian();
      sq += v * v;
    }
    const double inv = 1.0 / std::sqrt(std::max(sq, 1e-12));
    for (double& v : center) v *= inv;
  }

  FrameSequence vectors(count, latent_dim, 1.0);
  std::vector<std::string> ids(count);
  for (int i = 0; i < count; ++i) {
    const int cluster = i % num_clusters;
    std::vector<double> point(latent_dim);
    double sq = 0.0;
    for (int d = 0; d < latent_dim; ++d) {
      point[d] = centers[cluster][d] + noise * rng.next_gaussian();
      sq += point[d] * point[d];
    }
    const double inv = 1.0 / std::sqrt(std::max(sq, 1e-12));
    for (int d = 0; d < latent_dim; ++d) {
      vectors.at(i, d) = static_cast<float>(point[d] * inv);
    }
    ids[i] = "c" + std::to_string(cluster) + "_" + std::to_string(i);
  }
  return make_pool(std::move(vectors), std::move(ids));
}

}  // namespace dycast
