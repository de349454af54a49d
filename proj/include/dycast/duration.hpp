#pragma once

#include <cstdint>
#include <vector>

#include "dycast/core.hpp"

namespace dycast {

// Duration model parameters: one free mean per token (expected frames above
// the enforced minimum) and a shared dispersion alpha, so durations follow
// d_i = d_min + y_i with y_i ~ NB(mu_free_i, alpha), variance mu + alpha*mu^2.
struct DurationParams {
  std::vector<double> mu_free;
  double alpha = 1.0;
  int d_min = 1;
  double lambda = 0.05;    // length-regularizer strength
  double epsilon = 1e-8;   // regularizer stabilizer

  int num_tokens() const { return static_cast<int>(mu_free.size()); }
};

void validate_duration_params(const DurationParams& params);

// Maps raw predictor outputs to non-negative free means.
double softplus(double x);

// Digamma function, accurate to ~1e-13 for positive arguments.
double digamma(double x);

// Log pmf of NB with mean mu and dispersion alpha (r = 1/alpha,
// p = r/(r+mu)). mu == 0 degenerates to a point mass at zero.
double nb_log_pmf(long long y, double mu, double alpha);

// Negative log-likelihood of observed durations plus the normalized length
// penalty lambda * ((sum mu_free - T_free)/(T_free + eps))^2 where
// T_free = total_frames - N*d_min. Gradients cover every mu_free and alpha.
struct DurationNllResult {
  double nll = 0.0;
  std::vector<double> grad_mu_free;
  double grad_alpha = 0.0;
};

DurationNllResult duration_nll(const DurationParams& params,
                               const DurationVector& durations, int total_frames);

// Free decoding: d_i = d_min + round(mu_free_i), round half to even.
DurationVector decode_free(const DurationParams& params);

// Budget-constrained decoding: rescale free means to the allocatable budget
// T_free and apportion integers by largest remainder (ties to the lowest
// index), so sum(d) == total_frames exactly and every d_i >= d_min. A zero
// free-mean total falls back to a uniform split.
DurationVector decode_budget(const DurationParams& params, int total_frames);

// Moment/MLE fit on per-token duration samples: free means are the sample
// means of the excess durations, alpha is refined by gradient descent on the
// pooled likelihood (lambda = 0). Data with no overdispersion cannot
// identify alpha; it is clamped to 1e-4 and flagged.
struct DurationFitResult {
  DurationParams params;
  bool alpha_degenerate = false;
};

DurationFitResult fit_duration_params(const std::vector<std::vector<int>>& samples_per_token,
                                      int d_min = 1, int steps = 200,
                                      double learning_rate = 0.1);

}  // namespace dycast
