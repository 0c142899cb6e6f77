#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace binflux {

/// Every bin has the same linear transmission 10^(-loss/10).
struct UniformLoss {
  double avg_loss_db = 0.0;
};

/// Per-bin linear transmissions, indexed like BinWeights.
struct ExplicitTransmission {
  std::vector<double> transmissions;
};

using BinTransmission = std::variant<UniformLoss, ExplicitTransmission>;

/// Bins go to the APD selected by the output port of the last coupler.
struct FinalCouplerAssignment {};

/// Explicit APD index (0 or 1) per bin.
struct ExplicitAssignment {
  std::vector<int> detector_of_bin;
};

using DetectorAssignment = std::variant<FinalCouplerAssignment, ExplicitAssignment>;

/// Fiber-loop coupler tree with m loops and m+1 couplers.
///
/// Bin index layout: bit 0 of the index is the output port of the final
/// coupler, bit c+1 is set when the photon took loop c. With loops whose
/// delays at least double, increasing (index >> 1) means increasing arrival
/// time, so bins alternate between the two APDs.
struct MultiplexerSpec {
  std::vector<double> loop_delays;    ///< seconds, one per loop
  std::vector<double> coupler_ratios; ///< m+1 fractions sent to the delayed/second port
  BinTransmission transmission = UniformLoss{};
  DetectorAssignment assignment = FinalCouplerAssignment{};

  std::size_t loops() const noexcept { return loop_delays.size(); }
  std::size_t bins() const noexcept { return std::size_t{2} << loops(); }

  /// Ideal 50/50 tree with the given delays and uniform loss.
  static MultiplexerSpec ideal(std::vector<double> delays, double loss_db = 0.0);
};

struct BinWeights {
  std::vector<double> weights;       ///< P(photon lands in bin b and survives)
  std::vector<double> arrival_times; ///< seconds after the first bin
  std::vector<int> detector_of_bin;

  std::size_t bins() const noexcept { return weights.size(); }
  double total() const noexcept;
};

/// Throws ConfigError naming the first offending field.
void validate(const MultiplexerSpec &spec);

BinWeights build_bin_weights(const MultiplexerSpec &spec);

struct TimingReport {
  double min_spacing = 0.0;  ///< smallest gap between consecutive bins on one APD
  double train_length = 0.0; ///< last arrival + guard
  double max_rep_rate = 0.0; ///< 1 / train_length
  bool deadtime_violation = false;
};

TimingReport validate_timing(const BinWeights &weights, double deadtime, double guard);

} // namespace binflux
