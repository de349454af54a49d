#pragma once

#include <vector>

#include "dycast/core.hpp"

namespace dycast {

// Scalar spherical quantization: latents are L2-normalized onto the unit
// sphere and each dimension snaps to one of K evenly spaced levels spanning
// [-1/sqrt(L), +1/sqrt(L)] (endpoints included, so K = 2 is exactly binary
// sign quantization). Dequantized codes are renormalized back to the sphere.
struct SsqConfig {
  int latent_dim = 32;        // L
  int num_levels = 4;         // K, at most 256 so tokens serialize
  double entropy_weight = 0.1;
  double temperature = 0.1;   // soft-assignment sharpness

  SsqConfig() = default;
  SsqConfig(int latent_dim, int num_levels);
};

void validate_ssq_config(const SsqConfig& cfg);

// The k-th grid level for one dimension.
double ssq_level(const SsqConfig& cfg, int k);

// Normalize then snap each coordinate to the nearest level, ties to the
// lower index. The zero vector has no direction and is rejected.
std::vector<int> ssq_quantize(const SsqConfig& cfg, std::span<const double> latent);

// Map indices to grid values and renormalize. The all-middle code of an odd
// K has zero norm and is rejected.
std::vector<double> ssq_dequantize(const SsqConfig& cfg, std::span<const int> indices);

// Per-dimension soft assignment p_d(k) proportional to
// exp(-(z_d - level_k)^2 / temperature); rows sum to one.
std::vector<std::vector<double>> ssq_soft_quantize(const SsqConfig& cfg,
                                                   std::span<const double> latent);

// Factorized entropy regularizer over a batch of soft assignments:
// entropy_weight * sum_d [ mean_b H(p_d^b) - H(mean_b p_d^b) ]. Low
// per-sample entropy rewards confident snapping, high batch entropy rewards
// spreading mass across the levels. Gradient is taken with respect to the
// probability entries.
struct EntropyLossResult {
  double loss = 0.0;
  std::vector<std::vector<std::vector<double>>> grad;  // [sample][dim][level]
};

EntropyLossResult ssq_entropy_loss(const SsqConfig& cfg,
                                   const std::vector<std::vector<std::vector<double>>>& batch);

// All K^L index tuples with their dequantized embeddings. Tuples whose grid
// vector has zero norm (odd-K middle code) are listed with an empty
// embedding. Distinct tuples whose grid vectors are positive multiples of
// one another land on the same embedding; collision_count tallies the
// tuples involved beyond one representative per class.
struct CodebookEnumeration {
  std::vector<std::vector<int>> indices;
  std::vector<std::vector<double>> embeddings;
  int degenerate_count = 0;
  int collision_count = 0;
};

CodebookEnumeration ssq_enumerate_codebook(const SsqConfig& cfg);

}  // namespace dycast
