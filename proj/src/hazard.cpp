#include "dycast/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dycast/random.hpp"

namespace dycast {

namespace {

constexpr double kProbFloor = 1e-7;

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double clamp_prob(double p) {
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

}  // namespace

HazardSequence HazardSequence::from_logits(std::vector<double> logits) {
  if (logits.empty()) throw ValidationError("HazardSequence: length must be >= 1");
  HazardSequence h;
  h.probs_.reserve(logits.size());
  for (double l : logits) {
    if (!std::isfinite(l)) throw ValidationError("HazardSequence: non-finite logit");
    h.probs_.push_back(clamp_prob(sigmoid(l)));
  }
  h.logits_ = std::move(logits);
  return h;
}

HazardSequence HazardSequence::from_probs(const std::vector<double>& probs) {
  if (probs.empty()) throw ValidationError("HazardSequence: length must be >= 1");
  HazardSequence h;
  h.probs_.reserve(probs.size());
  h.logits_.reserve(probs.size());
  for (double p : probs) {
    if (!std::isfinite(p)) throw ValidationError("HazardSequence: non-finite probability");
    const double q = clamp_prob(p);
    h.probs_.push_back(q);
    h.logits_.push_back(std::log(q / (1.0 - q)));
  }
  return h;
}

int BoundaryTargets::total_frames() const {
  long long total = 0;
  for (int k : offsets) total += static_cast<long long>(k) + 1;
  if (total > std::numeric_limits<int>::max()) {
    throw ValidationError("BoundaryTargets: total length overflows");
  }
  return static_cast<int>(total);
}

BoundaryTargets BoundaryTargets::from_boundaries(const BoundarySet& b, int num_frames) {
  BoundaryTargets targets;
  targets.offsets = boundaries_to_durations(b, num_frames);
  for (int& k : targets.offsets) --k;  // duration d = offset k + 1
  return targets;
}

BoundarySet BoundaryTargets::to_boundaries() const {
  DurationVector d(offsets.begin(), offsets.end());
  for (int& v : d) ++v;
  return durations_to_boundaries(d);
}

void validate_decode_config(const BoundaryDecodeConfig& cfg) {
  if (!(cfg.tau_h > 0.0) || !(cfg.tau_h < 1.0)) {
    throw ValidationError("BoundaryDecodeConfig: tau_h must lie in (0,1)");
  }
  if (cfg.min_gap < 1) throw ValidationError("BoundaryDecodeConfig: min_gap must be >= 1");
  if (cfg.max_gap && *cfg.max_gap < cfg.min_gap) {
    throw ValidationError("BoundaryDecodeConfig: max_gap must be >= min_gap");
  }
}

NextBoundaryDistribution next_boundary_distribution(const HazardSequence& h,
                                                    int t, int horizon) {
  const int num_frames = h.num_frames();
  if (t < 0 || t >= num_frames) {
    throw ValidationError("next_boundary_distribution: frame index out of range");
  }
  if (horizon < 0 || t + horizon > num_frames) {
    throw ValidationError("next_boundary_distribution: horizon exceeds sequence");
  }
  NextBoundaryDistribution dist;
  dist.probs.resize(horizon);
  // Running survival product keeps sum(probs) + survival at 1 up to rounding.
  double survive = 1.0;
  for (int k = 0; k < horizon; ++k) {
    const double hazard = h.prob(t + k);
    dist.probs[k] = survive * hazard;
    survive *= 1.0 - hazard;
  }
  dist.survival = survive;
  return dist;
}

namespace {

void check_tiling(const BoundaryTargets& targets, int num_frames) {
  if (targets.offsets.empty()) {
    throw ValidationError("BoundaryTargets: at least one chunk required");
  }
  for (int k : targets.offsets) {
    if (k < 0) throw ValidationError("BoundaryTargets: negative offset");
  }
  if (targets.total_frames() != num_frames) {
    throw ValidationError("BoundaryTargets: offsets do not tile the sequence");
  }
}

}  // namespace

HazardNllResult hazard_nll(const HazardSequence& h, const BoundaryTargets& targets) {
  const int num_frames = h.num_frames();
  check_tiling(targets, num_frames);

  HazardNllResult result;
  result.grad_logits.assign(num_frames, 0.0);
  int start = 0;
  for (int k : targets.offsets) {
    for (int i = 0; i < k; ++i) {
      const double p = h.prob(start + i);
      result.nll -= std::log(1.0 - p);
      result.grad_logits[start + i] = p;  // d(-log(1-sigmoid))/dlogit
    }
    const double p = h.prob(start + k);
    result.nll -= std::log(p);
    result.grad_logits[start + k] = p - 1.0;  // d(-log sigmoid)/dlogit
    start += k + 1;
  }
  return result;
}

BoundarySet decode_boundaries(const HazardSequence& h, const BoundaryDecodeConfig& cfg) {
  validate_decode_config(cfg);
  const int num_frames = h.num_frames();
  Rng rng(cfg.seed);

  BoundarySet out;
  int prev_end = -1;
  for (int t = 0; t < num_frames; ++t) {
    const int chunk_len = t - prev_end;
    const bool forced = cfg.max_gap && chunk_len >= *cfg.max_gap;
    bool emit = forced || t == num_frames - 1;
    if (!emit && chunk_len >= cfg.min_gap) {
      if (cfg.mode == BoundaryDecodeConfig::Mode::greedy) {
        emit = h.prob(t) >= cfg.tau_h;
      } else {
        emit = rng.next_bernoulli(h.prob(t));
      }
    }
    if (emit) {
      out.ends.push_back(t);
      prev_end = t;
    }
  }
  return out;
}

HazardSequence fit_hazard_logits(const BoundaryTargets& targets, int num_frames,
                                 int steps, double learning_rate) {
  check_tiling(targets, num_frames);
  if (steps < 1) throw ValidationError("fit_hazard_logits: steps must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw ValidationError("fit_hazard_logits: learning_rate must be positive");
  }

  std::vector<double> logits(num_frames, 0.0);
  double prev_nll = std::numeric_limits<double>::infinity();
  int rising_steps = 0;
  for (int step = 0; step < steps; ++step) {
    const auto state = HazardSequence::from_logits(logits);
    const auto eval = hazard_nll(state, targets);
    if (eval.nll > prev_nll) {
      if (++rising_steps >= 10) {
        throw ValidationError("fit_hazard_logits: diverged (loss rose 10 steps)");
      }
    } else {
      rising_steps = 0;
    }
    prev_nll = eval.nll;
    for (int t = 0; t < num_frames; ++t) {
      logits[t] -= learning_rate * eval.grad_logits[t];
    }
  }
  return HazardSequence::from_logits(std::move(logits));
}

}  // namespace dycast
