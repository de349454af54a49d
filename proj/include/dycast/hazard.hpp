#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dycast/core.hpp"

namespace dycast {

// Per-frame boundary probabilities h_t in (0,1), kept together with their
// logits so the likelihood gradient stays well conditioned near 0 and 1.
// Probabilities supplied directly are clamped to [1e-7, 1 - 1e-7].
class HazardSequence {
 public:
  static HazardSequence from_logits(std::vector<double> logits);
  static HazardSequence from_probs(const std::vector<double>& probs);

  int num_frames() const { return static_cast<int>(logits_.size()); }
  double prob(int t) const { return probs_[t]; }
  double logit(int t) const { return logits_[t]; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& logits() const { return logits_; }

 private:
  HazardSequence() = default;
  std::vector<double> logits_;
  std::vector<double> probs_;
};

// Ground-truth next-boundary offsets: chunk i starts where chunk i-1 ended
// and its boundary frame sits offsets[i] frames after the start. Offsets
// tile [0, T) exactly, i.e. sum(offsets[i] + 1) == T.
struct BoundaryTargets {
  std::vector<int> offsets;

  int num_chunks() const { return static_cast<int>(offsets.size()); }
  int total_frames() const;

  static BoundaryTargets from_boundaries(const BoundarySet& b, int num_frames);
  BoundarySet to_boundaries() const;
};

struct BoundaryDecodeConfig {
  enum class Mode { greedy, sample };

  double tau_h = 0.5;              // emission threshold, in (0,1)
  int min_gap = 1;                 // minimum chunk length, frames
  std::optional<int> max_gap;      // force a boundary at this chunk length
  Mode mode = Mode::greedy;
  std::uint64_t seed = 0;          // sample mode only
};

void validate_decode_config(const BoundaryDecodeConfig& cfg);

// Distribution of the next boundary offset from frame t: probs[k] is the
// probability the boundary falls k frames after t for k < horizon, and
// survival is the mass of no boundary within the horizon. The two always
// sum to one.
struct NextBoundaryDistribution {
  std::vector<double> probs;
  double survival = 0.0;
};

NextBoundaryDistribution next_boundary_distribution(const HazardSequence& h,
                                                    int t, int horizon);

// Negative log-likelihood of the target offsets under the hazard model,
// with the gradient taken with respect to the stored logits.
struct HazardNllResult {
  double nll = 0.0;
  std::vector<double> grad_logits;
};

HazardNllResult hazard_nll(const HazardSequence& h, const BoundaryTargets& targets);

// Scan decoding with min_gap/max_gap gating. Greedy mode emits whenever an
// eligible frame has h_t >= tau_h; sample mode draws Bernoulli(h_t) at
// eligible frames from a generator seeded per call. Draws are consumed in
// scan order, one per eligible frame that is not already closed by force
// (max_gap reached or frame T-1). Any emission resets the gap clock.
BoundarySet decode_boundaries(const HazardSequence& h, const BoundaryDecodeConfig& cfg);

// Recovers per-frame free logits from target offsets by plain gradient
// descent on hazard_nll. Throws ValidationError if the loss increases ten
// steps in a row.
HazardSequence fit_hazard_logits(const BoundaryTargets& targets, int num_frames,
                                 int steps = 500, double learning_rate = 1.0);

}  // namespace dycast
