#pragma once

// Brute-force reference computations used only by the tests. None of these
// call into the library code paths they are used to check.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

namespace oracle {

struct Path {
  double probability;
  double time;
  int apd;
};

// Walks the coupler tree recursively: at coupler c the photon either stays
// (1 - r_c) or enters loop c (r_c); the last coupler picks the APD.
inline void walk(const std::vector<double> &delays, const std::vector<double> &ratios,
                 std::size_t c, double prob, double time, std::vector<Path> &out) {
  if (c == delays.size()) {
    out.push_back({prob * (1.0 - ratios[c]), time, 0});
    out.push_back({prob * ratios[c], time, 1});
    return;
  }
  walk(delays, ratios, c + 1, prob * (1.0 - ratios[c]), time, out);
  walk(delays, ratios, c + 1, prob * ratios[c], time + delays[c], out);
}

inline std::vector<Path> enumerate_paths(const std::vector<double> &delays,
                                         const std::vector<double> &ratios) {
  std::vector<Path> out;
  walk(delays, ratios, 0, 1.0, 0.0, out);
  return out;
}

// Distribution of the number of successes by summing over all 2^B outcomes.
inline std::vector<double> poisson_binomial_by_subsets(const std::vector<double> &p) {
  const std::size_t b = p.size();
  std::vector<double> dist(b + 1, 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << b); ++mask) {
    double w = 1.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < b; ++i) {
      if (mask >> i & 1u) {
        w *= p[i];
        ++k;
      } else {
        w *= 1.0 - p[i];
      }
    }
    dist[k] += w;
  }
  return dist;
}

inline double poisson_pmf(std::size_t k, double mu) {
  return std::exp(double(k) * std::log(mu) - mu - std::lgamma(double(k) + 1.0));
}

// Fraction of successes over `samples` Bernoulli draws with an RNG unrelated
// to the library's.
inline double bernoulli_frequency(double p, std::uint64_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution d(p);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i)
    hits += d(rng);
  return double(hits) / double(samples);
}

} // namespace oracle
