#include "icsmon/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace icsmon {

double sampling_model::total() const {
  return n_total > 0 ? n_total
                     : static_cast<double>(n_sampled) * rate_reciprocal;
}

bool sampling_model::valid() const {
  return static_cast<double>(n_sampled) * 10.0 <= total();
}

double p_hat(const sampling_model& m, bool force) {
  if (!force && !m.valid())
    throw std::domain_error(
        "sampling model outside the validity bound: n_sampled * 10 > N_total");
  double n = m.total();
  if (n <= 0)
    throw std::domain_error("total packet count must be positive");
  if (m.t_days <= 0)
    throw std::domain_error("observation period must be positive");
  double expected = m.host_rate_per_min * 60.0 * 24.0 * m.t_days;
  return std::clamp(expected / n, 0.0, 1.0);
}

double log_prob_zero(const sampling_model& m, bool force) {
  double p = p_hat(m, force);
  if (p >= 1.0)
    return m.n_sampled == 0 ? 0.0
                            : -std::numeric_limits<double>::infinity();
  return static_cast<double>(m.n_sampled) * std::log1p(-p);
}

double prob_k(const sampling_model& m, uint64_t k, bool force) {
  if (k > m.n_sampled)
    throw std::invalid_argument("k exceeds the sampled packet count");
  double p = p_hat(m, force);
  if (p <= 0.0)
    return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0)
    return k == m.n_sampled ? 1.0 : 0.0;
  double n = static_cast<double>(m.n_sampled);
  double kk = static_cast<double>(k);
  double lg = std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) -
              std::lgamma(n - kk + 1.0) + kk * std::log(p) +
              (n - kk) * std::log1p(-p);
  return std::exp(lg);
}

double prob_at_least_one(const sampling_model& m, bool force) {
  return -std::expm1(log_prob_zero(m, force));
}

mc_result monte_carlo_detection(const sampling_model& m, uint64_t trials,
                                uint64_t seed, bool force) {
  if (trials < 10000)
    throw std::invalid_argument("monte carlo needs at least 10^4 trials");
  double p = p_hat(m, force);
  uint64_t hits = 0;
  if (p > 0.0) {
    std::mt19937_64 rng(seed);
    std::binomial_distribution<long long> draw(
        static_cast<long long>(m.n_sampled), p);
    for (uint64_t t = 0; t < trials; ++t)
      hits += draw(rng) >= 1;
  }
  mc_result r;
  r.trials = trials;
  r.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  double hw =
      1.96 * std::sqrt(r.estimate * (1.0 - r.estimate) /
                       static_cast<double>(trials));
  // Rule-of-three floor so the width never collapses to zero at the edges.
  r.half_width = std::max(hw, 3.0 / static_cast<double>(trials));
  return r;
}

sample_bounds sigma_bounds(double eligible, double rate_reciprocal,
                           double k_sigma) {
  if (eligible < 0 || rate_reciprocal < 1)
    throw std::invalid_argument("bad sampling parameters");
  double p = 1.0 / rate_reciprocal;
  sample_bounds b;
  b.mean = eligible * p;
  b.sigma = std::sqrt(eligible * p * (1.0 - p));
  b.lo = b.mean - k_sigma * b.sigma;
  b.hi = b.mean + k_sigma * b.sigma;
  return b;
}

} // namespace icsmon
