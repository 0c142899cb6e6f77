#pragma once

#include "binflux/detector.hpp"
#include "binflux/mc_engine.hpp"
#include "binflux/multiplexer.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace binflux {

/// p(n), n = 0..B, for one source.
struct ClickDistribution {
  std::vector<double> probs;
  PulseSource source = Coherent{};

  std::size_t bins() const noexcept { return probs.empty() ? 0 : probs.size() - 1; }
  double mean() const noexcept;
  double sum() const noexcept;
};

inline constexpr std::uint64_t kFockEnumerationCap = 12;

/// Distribution of the number of successes among independent Bernoulli
/// trials with the given probabilities (O(B^2) convolution).
std::vector<double> poisson_binomial(std::span<const double> success_probs);

/// Per-bin click probabilities 1 - (1 - dark_b) exp(-mu q_b eta_eff).
std::vector<double> coherent_click_probabilities(double mu, const BinWeights &weights,
                                                 const DetectorSpec &det);

/// Closed-form click-count law for a coherent pulse. Rejects mechanistic
/// undershoot, whose bin correlations break the product form.
ClickDistribution coherent_click_distribution(double mu, const BinWeights &weights,
                                              const DetectorSpec &det);

/// Exact click-count law for a Fock state by enumerating every photon
/// occupancy of (bins..., lost), weighted by its multinomial probability.
ClickDistribution fock_click_distribution(std::uint64_t n_photons, const BinWeights &weights,
                                          const DetectorSpec &det);

} // namespace binflux
