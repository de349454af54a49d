#include "dycast/duration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dycast {

void validate_duration_params(const DurationParams& params) {
  if (params.mu_free.empty()) {
    throw ValidationError("DurationParams: at least one token required");
  }
  for (double mu : params.mu_free) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
      throw ValidationError("DurationParams: mu_free must be finite and >= 0");
    }
  }
  if (!(params.alpha > 0.0)) throw ValidationError("DurationParams: alpha must be positive");
  if (params.d_min < 1) throw ValidationError("DurationParams: d_min must be >= 1");
  if (params.lambda < 0.0) throw ValidationError("DurationParams: lambda must be >= 0");
  if (!(params.epsilon > 0.0)) throw ValidationError("DurationParams: epsilon must be positive");
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double digamma(double x) {
  if (!(x > 0.0)) throw ValidationError("digamma: argument must be positive");
  double value = 0.0;
  while (x < 10.0) {  // shift into the asymptotic regime
    value -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // ln x - 1/(2x) - sum B_2n / (2n x^2n)
  double series = inv2 * (1.0 / 12.0 -
                  inv2 * (1.0 / 120.0 -
                  inv2 * (1.0 / 252.0 -
                  inv2 * (1.0 / 240.0 -
                  inv2 * (1.0 / 132.0)))));
  return value + std::log(x) - 0.5 * inv - series;
}

double nb_log_pmf(long long y, double mu, double alpha) {
  if (y < 0) throw ValidationError("nb_log_pmf: y must be >= 0");
  if (!(alpha > 0.0)) throw ValidationError("nb_log_pmf: alpha must be positive");
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw ValidationError("nb_log_pmf: mu must be finite and >= 0");
  }
  if (mu == 0.0) {
    return y == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const double r = 1.0 / alpha;
  const double yd = static_cast<double>(y);
  return std::lgamma(yd + r) - std::lgamma(r) - std::lgamma(yd + 1.0) +
         r * std::log(r / (r + mu)) + yd * std::log(mu / (r + mu));
}

DurationNllResult duration_nll(const DurationParams& params,
                               const DurationVector& durations, int total_frames) {
  validate_duration_params(params);
  const int num_tokens = params.num_tokens();
  if (static_cast<int>(durations.size()) != num_tokens) {
    throw ValidationError("duration_nll: durations length must match mu_free");
  }
  for (int d : durations) {
    if (d < params.d_min) throw ValidationError("duration_nll: duration below d_min");
  }
  if (total_frames < num_tokens * params.d_min) {
    throw ValidationError("duration_nll: budget below N*d_min is infeasible");
  }

  const double r = 1.0 / params.alpha;
  DurationNllResult result;
  result.grad_mu_free.assign(num_tokens, 0.0);

  for (int i = 0; i < num_tokens; ++i) {
    const double y = static_cast<double>(durations[i] - params.d_min);
    const double mu = params.mu_free[i];
    result.nll -= nb_log_pmf(durations[i] - params.d_min, mu, params.alpha);
    if (mu > 0.0 || y == 0.0) {
      // d(-logpmf)/dmu and d(-logpmf)/dalpha via r = 1/alpha; both formulas
      // stay finite at mu = 0 when y = 0 (one-sided derivative).
      result.grad_mu_free[i] = (r + y) / (r + mu) - (y > 0.0 ? y / mu : 0.0);
      const double dlogpmf_dr = digamma(y + r) - digamma(r) +
                                std::log(r / (r + mu)) + (mu - y) / (r + mu);
      result.grad_alpha += r * r * dlogpmf_dr;  // dr/dalpha = -r^2
    }
  }

  const double t_free = static_cast<double>(total_frames - num_tokens * params.d_min);
  const double denom = t_free + params.epsilon;
  const double mu_sum = std::accumulate(params.mu_free.begin(), params.mu_free.end(), 0.0);
  const double rel = (mu_sum - t_free) / denom;
  result.nll += params.lambda * rel * rel;
  const double reg_grad = 2.0 * params.lambda * rel / denom;
  for (int i = 0; i < num_tokens; ++i) result.grad_mu_free[i] += reg_grad;
  return result;
}

namespace {

// Round half to even, as std::nearbyint under the default rounding mode.
int round_half_even(double x) { return static_cast<int>(std::nearbyint(x)); }

}  // namespace

DurationVector decode_free(const DurationParams& params) {
  validate_duration_params(params);
  DurationVector out;
  out.reserve(params.mu_free.size());
  for (double mu : params.mu_free) {
    if (mu >= 1e9) throw ValidationError("decode_free: free mean too large for a frame count");
    out.push_back(params.d_min + round_half_even(mu));
  }
  return out;
}

DurationVector decode_budget(const DurationParams& params, int total_frames) {
  validate_duration_params(params);
  const int num_tokens = params.num_tokens();
  if (total_frames < num_tokens * params.d_min) {
    throw ValidationError("decode_budget: budget below N*d_min is infeasible");
  }
  const int t_free = total_frames - num_tokens * params.d_min;
  const double mu_sum = std::accumulate(params.mu_free.begin(), params.mu_free.end(), 0.0);

  std::vector<double> scaled(num_tokens);
  for (int i = 0; i < num_tokens; ++i) {
    scaled[i] = mu_sum > 0.0 ? params.mu_free[i] * (static_cast<double>(t_free) / mu_sum)
                             : static_cast<double>(t_free) / num_tokens;
  }

  DurationVector allocation(num_tokens);
  std::vector<double> fractional(num_tokens);
  int assigned = 0;
  for (int i = 0; i < num_tokens; ++i) {
    const double whole = std::floor(scaled[i]);
    allocation[i] = static_cast<int>(whole);
    fractional[i] = scaled[i] - whole;
    assigned += allocation[i];
  }

  int remainder = t_free - assigned;
  std::vector<int> order(num_tokens);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (fractional[a] != fractional[b]) return fractional[a] > fractional[b];
    return a < b;
  });
  for (int i = 0; i < remainder; ++i) ++allocation[order[i]];

  for (int& d : allocation) d += params.d_min;
  return allocation;
}

DurationFitResult fit_duration_params(const std::vector<std::vector<int>>& samples_per_token,
                                      int d_min, int steps, double learning_rate) {
  if (samples_per_token.empty()) {
    throw ValidationError("fit_duration_params: at least one token class required");
  }
  if (d_min < 1) throw ValidationError("fit_duration_params: d_min must be >= 1");

  DurationFitResult result;
  result.params.d_min = d_min;
  result.params.lambda = 0.0;

  // Free means are the per-class sample means of the excess durations (the
  // exact MLE for the NB mean given alpha).
  std::vector<double> pooled;
  for (const auto& samples : samples_per_token) {
    if (samples.empty()) throw ValidationError("fit_duration_params: empty sample class");
    double sum = 0.0;
    for (int s : samples) {
      if (s < d_min) throw ValidationError("fit_duration_params: sample below d_min");
      const double y = static_cast<double>(s - d_min);
      sum += y;
      pooled.push_back(y);
    }
    result.params.mu_free.push_back(sum / static_cast<double>(samples.size()));
  }

  const double n = static_cast<double>(pooled.size());
  const double mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / n;
  double var = 0.0;
  for (double y : pooled) var += (y - mean) * (y - mean);
  var /= n;

  if (var <= mean || mean == 0.0) {
    // No overdispersion to explain; alpha is unidentifiable.
    result.params.alpha = 1e-4;
    result.alpha_degenerate = true;
    return result;
  }

  // Moment start, then gradient descent on log(alpha) for the pooled NLL.
  double log_alpha = std::log(std::clamp((var - mean) / (mean * mean), 1e-3, 1e3));
  for (int step = 0; step < steps; ++step) {
    const double alpha = std::exp(log_alpha);
    const double r = 1.0 / alpha;
    double grad_alpha = 0.0;
    for (std::size_t c = 0; c < samples_per_token.size(); ++c) {
      const double mu = result.params.mu_free[c];
      if (mu <= 0.0) continue;
      for (int s : samples_per_token[c]) {
        const double y = static_cast<double>(s - d_min);
        const double dlogpmf_dr = digamma(y + r) - digamma(r) +
                                  std::log(r / (r + mu)) + (mu - y) / (r + mu);
        grad_alpha += r * r * dlogpmf_dr;
      }
    }
    log_alpha -= learning_rate * grad_alpha * alpha / n;  // chain rule, mean-scaled
    log_alpha = std::clamp(log_alpha, std::log(1e-4), std::log(1e4));
  }
  result.params.alpha = std::exp(log_alpha);
  return result;
}

}  // namespace dycast
