#include "dycast/ssq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace dycast {

SsqConfig::SsqConfig(int latent_dim, int num_levels)
    : latent_dim(latent_dim), num_levels(num_levels) {
  validate_ssq_config(*this);
}

void validate_ssq_config(const SsqConfig& cfg) {
  if (cfg.latent_dim < 1) throw ValidationError("SsqConfig: latent_dim must be >= 1");
  if (cfg.num_levels < 2) throw ValidationError("SsqConfig: num_levels must be >= 2");
  if (cfg.num_levels > 256) {
    throw ValidationError("SsqConfig: num_levels must be <= 256 for token serialization");
  }
  if (cfg.entropy_weight < 0.0) throw ValidationError("SsqConfig: entropy_weight must be >= 0");
  if (!(cfg.temperature > 0.0)) throw ValidationError("SsqConfig: temperature must be positive");
}

double ssq_level(const SsqConfig& cfg, int k) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
  // Written so that level(K-1-k) == -level(k) exactly; equidistant ties then
  // resolve identically on both sides of zero.
  return bound * static_cast<double>(2 * k - (cfg.num_levels - 1)) /
         static_cast<double>(cfg.num_levels - 1);
}

namespace {

void check_dim(const SsqConfig& cfg, std::size_t size, const char* what) {
  if (size != static_cast<std::size_t>(cfg.latent_dim)) {
    throw ValidationError(std::string(what) + ": latent dimension mismatch");
  }
}

double norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

int nearest_level(const SsqConfig& cfg, double value) {
  int best = 0;
  double best_dist = std::abs(value - ssq_level(cfg, 0));
  for (int k = 1; k < cfg.num_levels; ++k) {
    const double dist = std::abs(value - ssq_level(cfg, k));
    if (dist < best_dist) {  // strict: ties stay with the lower index
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

std::vector<int> ssq_quantize(const SsqConfig& cfg, std::span<const double> latent) {
  validate_ssq_config(cfg);
  check_dim(cfg, latent.size(), "ssq_quantize");
  for (double v : latent) {
    if (!std::isfinite(v)) throw ValidationError("ssq_quantize: non-finite input");
  }
  const double scale = norm(latent);
  if (!(scale > 0.0)) throw ValidationError("ssq_quantize: zero vector has no direction");

  std::vector<int> indices(cfg.latent_dim);
  for (int d = 0; d < cfg.latent_dim; ++d) {
    indices[d] = nearest_level(cfg, latent[d] / scale);
  }
  return indices;
}

std::vector<double> ssq_dequantize(const SsqConfig& cfg, std::span<const int> indices) {
  validate_ssq_config(cfg);
  check_dim(cfg, indices.size(), "ssq_dequantize");
  std::vector<double> values(cfg.latent_dim);
  for (int d = 0; d < cfg.latent_dim; ++d) {
    if (indices[d] < 0 || indices[d] >= cfg.num_levels) {
      throw ValidationError("ssq_dequantize: index out of range");
    }
    values[d] = ssq_level(cfg, indices[d]);
  }
  const double scale = norm(values);
  if (!(scale > 0.0)) {
    throw ValidationError("ssq_dequantize: all-zero grid code cannot be normalized");
  }
  for (double& v : values) v /= scale;
  return values;
}

std::vector<std::vector<double>> ssq_soft_quantize(const SsqConfig& cfg,
                                                   std::span<const double> latent) {
  validate_ssq_config(cfg);
  check_dim(cfg, latent.size(), "ssq_soft_quantize");
  std::vector<std::vector<double>> assignment(cfg.latent_dim,
                                              std::vector<double>(cfg.num_levels));
  for (int d = 0; d < cfg.latent_dim; ++d) {
    // Shift by the max exponent so the softmax never underflows to all-zero.
    double max_exponent = -std::numeric_limits<double>::infinity();
    std::vector<double> exponents(cfg.num_levels);
    for (int k = 0; k < cfg.num_levels; ++k) {
      const double diff = latent[d] - ssq_level(cfg, k);
      exponents[k] = -(diff * diff) / cfg.temperature;
      max_exponent = std::max(max_exponent, exponents[k]);
    }
    double total = 0.0;
    for (int k = 0; k < cfg.num_levels; ++k) {
      assignment[d][k] = std::exp(exponents[k] - max_exponent);
      total += assignment[d][k];
    }
    for (int k = 0; k < cfg.num_levels; ++k) assignment[d][k] /= total;
  }
  return assignment;
}

EntropyLossResult ssq_entropy_loss(const SsqConfig& cfg,
                                   const std::vector<std::vector<std::vector<double>>>& batch) {
  validate_ssq_config(cfg);
  if (batch.empty()) throw ValidationError("ssq_entropy_loss: batch must be non-empty");
  const std::size_t batch_size = batch.size();
  for (const auto& sample : batch) {
    if (sample.size() != static_cast<std::size_t>(cfg.latent_dim)) {
      throw ValidationError("ssq_entropy_loss: latent dimension mismatch");
    }
    for (const auto& row : sample) {
      if (row.size() != static_cast<std::size_t>(cfg.num_levels)) {
        throw ValidationError("ssq_entropy_loss: level count mismatch");
      }
    }
  }

  const double floor = 1e-300;  // keeps log finite at exact zeros
  EntropyLossResult result;
  result.grad.assign(batch_size,
                     std::vector<std::vector<double>>(
                         cfg.latent_dim, std::vector<double>(cfg.num_levels, 0.0)));

  for (int d = 0; d < cfg.latent_dim; ++d) {
    std::vector<double> mean_prob(cfg.num_levels, 0.0);
    double mean_sample_entropy = 0.0;
    for (std::size_t b = 0; b < batch_size; ++b) {
      for (int k = 0; k < cfg.num_levels; ++k) {
        const double p = batch[b][d][k];
        mean_prob[k] += p / static_cast<double>(batch_size);
        mean_sample_entropy -= p * std::log(std::max(p, floor));
      }
    }
    mean_sample_entropy /= static_cast<double>(batch_size);
    double batch_entropy = 0.0;
    for (int k = 0; k < cfg.num_levels; ++k) {
      batch_entropy -= mean_prob[k] * std::log(std::max(mean_prob[k], floor));
    }
    result.loss += cfg.entropy_weight * (mean_sample_entropy - batch_entropy);
    for (std::size_t b = 0; b < batch_size; ++b) {
      for (int k = 0; k < cfg.num_levels; ++k) {
        const double p = std::max(batch[b][d][k], floor);
        result.grad[b][d][k] = cfg.entropy_weight / static_cast<double>(batch_size) *
                               (std::log(std::max(mean_prob[k], floor)) - std::log(p));
      }
    }
  }
  return result;
}

CodebookEnumeration ssq_enumerate_codebook(const SsqConfig& cfg) {
  validate_ssq_config(cfg);
  const double size = std::pow(static_cast<double>(cfg.num_levels),
                               static_cast<double>(cfg.latent_dim));
  if (size > static_cast<double>(1 << 20)) {
    throw ValidationError("ssq_enumerate_codebook: K^L exceeds the 2^20 cap");
  }
  const int total = static_cast<int>(size);

  CodebookEnumeration out;
  out.indices.reserve(total);
  out.embeddings.reserve(total);
  // Group tuples by rounded embedding to count positive-scalar collisions.
  std::map<std::vector<long long>, int> groups;

  std::vector<int> tuple(cfg.latent_dim, 0);
  for (int n = 0; n < total; ++n) {
    int rest = n;
    for (int d = cfg.latent_dim - 1; d >= 0; --d) {
      tuple[d] = rest % cfg.num_levels;
      rest /= cfg.num_levels;
    }
    out.indices.push_back(tuple);
    std::vector<double> values(cfg.latent_dim);
    double scale = 0.0;
    for (int d = 0; d < cfg.latent_dim; ++d) {
      values[d] = ssq_level(cfg, tuple[d]);
      scale += values[d] * values[d];
    }
    scale = std::sqrt(scale);
    if (!(scale > 0.0)) {
      ++out.degenerate_count;
      out.embeddings.emplace_back();
      continue;
    }
    std::vector<long long> key(cfg.latent_dim);
    for (int d = 0; d < cfg.latent_dim; ++d) {
      values[d] /= scale;
      key[d] = std::llround(values[d] * 1e9);
    }
    ++groups[key];
    out.embeddings.push_back(std::move(values));
  }
  for (const auto& [key, count] : groups) {
    if (count > 1) out.collision_count += count - 1;
  }
  return out;
}

}  // namespace dycast
