#pragma once

// Paired permutation test on per-question correctness. Under the null the
// sign of each per-question difference is exchangeable; the statistic is the
// absolute sum of differences, and the two-sided p doubles the tail mass
// P(|T'| >= |T_obs|), capped at 1. Exact enumeration for small n, sign-flip
// sampling with a fixed seed otherwise.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace pearl {

inline double exact_permutation_p(const std::vector<int>& diffs) {
  std::vector<int> nonzero;
  for (int d : diffs)
    if (d != 0) nonzero.push_back(d);
  long t_obs = 0;
  for (int d : nonzero) t_obs += d;
  t_obs = std::labs(t_obs);
  size_t m = nonzero.size();
  // zero differences flip symmetrically: they scale numerator and
  // denominator alike, so enumerating only the nonzero ones is exact
  uint64_t total = uint64_t{1} << m;
  uint64_t count = 0;
  for (uint64_t mask = 0; mask < total; ++mask) {
    long t = 0;
    for (size_t i = 0; i < m; ++i) t += (mask >> i) & 1 ? -nonzero[i] : nonzero[i];
    if (std::labs(t) >= t_obs) ++count;
  }
  double p = 2.0 * static_cast<double>(count) / static_cast<double>(total);
  return p > 1.0 ? 1.0 : p;
}

inline double sampled_permutation_p(const std::vector<int>& diffs, int resamples,
                                    uint64_t seed) {
  std::vector<int> nonzero;
  for (int d : diffs)
    if (d != 0) nonzero.push_back(d);
  long t_obs = 0;
  for (int d : nonzero) t_obs += d;
  t_obs = std::labs(t_obs);
  std::mt19937_64 rng(seed);
  long count = 0;
  for (int r = 0; r < resamples; ++r) {
    long t = 0;
    uint64_t bits = 0;
    int have = 0;
    for (size_t i = 0; i < nonzero.size(); ++i) {
      if (have == 0) {
        bits = rng();
        have = 64;
      }
      t += (bits & 1) ? -nonzero[i] : nonzero[i];
      bits >>= 1;
      --have;
    }
    if (std::labs(t) >= t_obs) ++count;
  }
  // add-one Monte Carlo estimate so a sampled p is never exactly zero
  double p = 2.0 * static_cast<double>(count + 1) / static_cast<double>(resamples + 1);
  return p > 1.0 ? 1.0 : p;
}

struct SignificanceOptions {
  int exact_threshold = 20;  // exact enumeration when the pair count is <= this
  int resamples = 100000;
  uint64_t seed = 20230523;
};

inline double permutation_p(const std::vector<int>& diffs,
                            const SignificanceOptions& options = {}) {
  if (static_cast<int>(diffs.size()) <= options.exact_threshold)
    return exact_permutation_p(diffs);
  return sampled_permutation_p(diffs, options.resamples, options.seed);
}

}  // namespace pearl
