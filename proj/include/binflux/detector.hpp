#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace binflux {

struct NoUndershoot {};

/// Efficiency as a piecewise-linear function of μ, clamped at the ends.
/// Anchors are (μ, η) pairs sorted by strictly increasing μ, η in (0,1].
struct GlobalEfficiency {
  std::vector<std::pair<double, double>> anchors;
};

/// After a photon-caused avalanche of two or more photons, the next bin on
/// the same APD loses its click with probability p_miss_next.
struct MechanisticUndershoot {
  double p_miss_next = 0.0;
};

using UndershootModel = std::variant<NoUndershoot, GlobalEfficiency, MechanisticUndershoot>;

/// Measured afterpulse figures. Recorded with a preset, never simulated.
struct AfterpulseMetadata {
  double probability = 0.0;
  double gate_width = 0.0; ///< seconds
};

struct DetectorSpec {
  double efficiency = 1.0;                    ///< per-photon detection probability
  std::array<double, 2> dark_prob_per_gate{}; ///< one per APD
  double gate_width = 0.0;                    ///< seconds, metadata
  double deadtime = 0.0;                      ///< seconds
  UndershootModel undershoot = NoUndershoot{};
  std::optional<AfterpulseMetadata> afterpulse;

  bool is_mechanistic() const noexcept {
    return std::holds_alternative<MechanisticUndershoot>(undershoot);
  }
};

/// Throws ConfigError naming the first offending field.
void validate(const DetectorSpec &spec);

/// 1 - (1 - dark) (1 - eff)^photons
double click_probability(std::size_t photons_in_bin, double eff, double dark);

/// η at mean photon number mu. Models other than GlobalEfficiency return
/// spec.efficiency.
double effective_efficiency(const DetectorSpec &spec, double mu);

/// Probability that at least one dark count appears in a shot with
/// bins_per_apd gates on each APD.
double shot_dark_probability(const DetectorSpec &spec, std::size_t bins_per_apd);

} // namespace binflux
