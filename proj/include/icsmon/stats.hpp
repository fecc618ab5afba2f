#pragma once

#include <cstdint>

namespace icsmon {

/// Inputs to the binomial sampling-detection model. A host emitting
/// host_rate_per_min packets for t_days contributes its share of the n_total
/// packets crossing the exchange; each of the n_sampled captured packets is
/// one draw of that share.
struct sampling_model {
  double t_days = 31;
  double n_total = 0; // 0: derived as n_sampled * rate_reciprocal
  uint64_t n_sampled = 0;
  double rate_reciprocal = 4096;
  double host_rate_per_min = 1.0;

  double total() const;

  /// The model assumes the sampled count stays well below the population:
  /// n_sampled * 10 <= n_total. Violations are reported, not fatal; the
  /// computations below take `force` to proceed anyway.
  bool valid() const;
};

/// Probability that one sampled packet belongs to the modeled host.
double p_hat(const sampling_model& m, bool force = false);

/// Binomial pmf P(X = k) over n_sampled draws, evaluated in log space.
/// Throws std::invalid_argument when k exceeds n_sampled.
double prob_k(const sampling_model& m, uint64_t k, bool force = false);

/// log P(X = 0) = n * log1p(-p_hat).
double log_prob_zero(const sampling_model& m, bool force = false);

/// P(X >= 1) via expm1 for stability near 1.
double prob_at_least_one(const sampling_model& m, bool force = false);

struct mc_result {
  double estimate = 0;   // fraction of trials that sampled at least one packet
  double half_width = 0; // 95% normal-approximation half-width
  uint64_t trials = 0;
};

/// Empirical check of prob_at_least_one by exact binomial sampling.
/// Deterministic under a fixed seed. Requires trials >= 10^4.
mc_result monte_carlo_detection(const sampling_model& m, uint64_t trials,
                                uint64_t seed, bool force = false);

struct sample_bounds {
  double mean = 0;
  double sigma = 0;
  double lo = 0;
  double hi = 0;
};

/// Expected sampled-packet count and k-sigma interval when `eligible`
/// packets each survive sampling with probability 1/rate_reciprocal.
sample_bounds sigma_bounds(double eligible, double rate_reciprocal,
                           double k_sigma = 3.0);

} // namespace icsmon
