#pragma once

#include "binflux/config.hpp"
#include "binflux/response_matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace binflux {

/// p(mu | observations) on mu = 0..mu_max under a uniform prior.
struct Posterior {
  std::vector<double> probs;
  int mode = 0;             ///< argmax, smallest mu on ties
  double normalization = 0; ///< sum of probs after normalizing (should be 1)
};

/// Contiguous mode-anchored highest-density interval.
struct CredibleInterval {
  double level = 0.90;
  int mode = 0;
  int lo = 0;
  int hi = 0;
  double mass = 0.0;

  /// Length of [lo - 1/2, hi + 1/2]: each integer mu stands for a unit cell,
  /// so this counts the mu values the interval covers.
  int extent() const noexcept { return hi - lo + 1; }
};

/// Normalized column n of m. Throws DegenerateEvidenceError if the column
/// is identically zero and InputError if n > B.
Posterior posterior_single(const ResponseMatrix &m, std::size_t n);

/// Normalized product of single-shot posteriors, accumulated in log space.
/// Observations above max_admissible_n (when given) raise
/// RejectedObservationError.
Posterior posterior_multi(const ResponseMatrix &m, std::span<const std::size_t> observations,
                          std::optional<std::size_t> max_admissible_n = std::nullopt);

/// Grows from the mode, each step adding whichever neighbour carries more
/// probability (the smaller mu on ties), until the mass reaches level.
CredibleInterval credible_interval(const Posterior &post, double level = 0.90);

/// Largest n such that, for every n' <= n, the posterior p(mu | n') at
/// mu_max and at 2 mu_max differ by less than `tolerance` in total
/// variation. Empty if even n = 0 fails.
std::optional<std::size_t> stability_max_n(const ResponseMatrix &at_mu_max,
                                           const ResponseMatrix &at_double,
                                           double tolerance);

/// Convenience overload building both exact matrices from the config.
std::optional<std::size_t> stability_max_n(const SystemConfig &config, int mu_max,
                                           double tolerance);

inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kSpeedOfLight = 2.99792458e8;   // m / s
inline constexpr double kTelecomWavelength = 1550e-9;   // m

/// Energy carried by `width_photons` photons at `wavelength` (meters).
double interval_to_energy(double width_photons, double wavelength);

struct RelativeErrorCurve {
  double mu_true = 0.0;
  /// trials[t][k-1]: interval extent / mu_true after k shots of trial t.
  std::vector<std::vector<double>> trials;
  std::vector<double> median;
  std::vector<double> q10;
  std::vector<double> q90;
  std::uint64_t rejected_shots = 0;

  std::size_t max_shots() const noexcept { return median.size(); }
};

struct RelativeErrorOptions {
  double level = 0.90;
  unsigned threads = 0; ///< 0: default_thread_count()
};

/// Simulates n_trials independent series of max_shots shots at mu_true and
/// records the relative 90 % interval extent after every shot. Shots with n
/// above the stability cutoff are discarded and replaced.
RelativeErrorCurve relative_error_curve(const SystemConfig &config, const ResponseMatrix &m,
                                        double mu_true, std::size_t max_shots,
                                        std::size_t n_trials, std::uint64_t seed,
                                        std::optional<std::size_t> max_admissible_n,
                                        const RelativeErrorOptions &options = {});

/// First k (1-based) at which `curve[k-1] <= threshold`; empty if never.
std::optional<std::size_t> shots_to_reach(std::span<const double> curve, double threshold);

/// Median over trials of shots_to_reach; trials that never reach the
/// threshold count as max_shots + 1.
double median_shots_to_reach(const RelativeErrorCurve &curve, double threshold);

} // namespace binflux
