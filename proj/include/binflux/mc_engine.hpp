#pragma once

#include "binflux/detector.hpp"
#include "binflux/multiplexer.hpp"

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

namespace binflux {

struct Coherent {
  double mu = 0.0;
};

struct Fock {
  std::uint64_t n_photons = 0;
};

using PulseSource = std::variant<Coherent, Fock>;

inline constexpr std::uint64_t kDefaultFockCap = 1'000'000;

/// Intensity used to resolve the effective efficiency: μ for coherent
/// pulses, the photon number for Fock states.
double source_intensity(const PulseSource &source);

struct ClickRecord {
  std::vector<bool> pattern;
  std::size_t n = 0;
  std::uint64_t shot_index = 0;
};

/// A shot together with the detected photon count in every bin.
struct ShotDetail {
  ClickRecord record;
  std::vector<std::uint32_t> photons;
};

/// Precomputed per-bin sampling tables for one (source, multiplexer,
/// detector) triple. Immutable after construction; simulate() is const and
/// safe to call from several threads.
class ShotSimulator {
public:
  ShotSimulator(const PulseSource &source, const BinWeights &weights, const DetectorSpec &det,
                std::uint64_t fock_cap = kDefaultFockCap);

  ClickRecord simulate(std::uint64_t seed, std::uint64_t shot_index) const;
  ShotDetail simulate_detail(std::uint64_t seed, std::uint64_t shot_index) const;

  std::size_t bins() const noexcept { return weights_.bins(); }
  double efficiency() const noexcept { return eta_eff_; }

  /// Click count only, without materializing the pattern.
  std::size_t count_clicks(std::uint64_t seed, std::uint64_t shot_index) const;

private:
  template <class Sink>
  void run(std::uint64_t seed, std::uint64_t shot_index, Sink &&sink) const;

  PulseSource source_;
  BinWeights weights_;
  std::vector<std::size_t> order_; // arrival order, ties by index
  std::vector<double> dark_;       // per bin
  std::vector<double> lambda_;     // coherent: mean detected photons per bin
  std::vector<double> empty_prob_; // coherent: exp(-lambda)
  std::vector<double> cell_cdf_;   // fock: cumulative over bins..., lost
  double eta_eff_ = 1.0;
  double p_miss_next_ = 0.0;
  bool mechanistic_ = false;
};

ClickRecord simulate_shot(const PulseSource &source, const BinWeights &weights,
                          const DetectorSpec &det, std::uint64_t seed,
                          std::uint64_t shot_index = 0);

struct BatchResult {
  std::vector<std::uint64_t> histogram; ///< length B+1, counts of n
  std::vector<ClickRecord> records;     ///< filled only when requested

  std::uint64_t shots() const noexcept;
  std::vector<double> probabilities() const;
};

struct BatchOptions {
  bool store_records = false;
  unsigned threads = 0; ///< 0: default_thread_count()
};

BatchResult simulate_batch(const PulseSource &source, const BinWeights &weights,
                           const DetectorSpec &det, std::uint64_t n_shots, std::uint64_t seed,
                           const BatchOptions &options = {});

/// hardware_concurrency, capped by BINFLUX_THREADS when set.
unsigned default_thread_count();

} // namespace binflux
