#pragma once

#include "binflux/detector.hpp"
#include "binflux/mc_engine.hpp"
#include "binflux/multiplexer.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace binflux {

/// The physical detector: multiplexer, APDs and the timing guard.
struct SystemConfig {
  std::string name;
  MultiplexerSpec multiplexer;
  DetectorSpec detector;
  double guard = 0.0; ///< seconds appended to the last bin; defaults to one deadtime

  BinWeights weights() const { return build_bin_weights(multiplexer); }
  TimingReport timing() const {
    return validate_timing(weights(), detector.deadtime, guard);
  }
};

struct RunConfig {
  SystemConfig system;
  PulseSource source = Coherent{};
  std::optional<std::uint64_t> seed; ///< required for any Monte Carlo run
  std::uint64_t shots = 1'000'000;
  int mu_max = 400;
  double stability_tolerance = 0.01;
};

/// 16 bins, 5/10/25 us loops, eta = 10 %, 1.44 dB, 1.6e-4 dark per 20 ns gate.
SystemConfig preset_conventional16();
/// 32 bins, 9.78 ns bin spacing, eta = 16.5 % -> 14.5 %, 1.35 dB, darks 1e-5/5e-5.
SystemConfig preset_rapid32();

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
SystemConfig preset(const std::string &name);

void validate(const SystemConfig &config);

nlohmann::json to_json(const SystemConfig &config);
nlohmann::json to_json(const RunConfig &config);
nlohmann::json to_json(const PulseSource &source);

/// Parses and validates; unknown or ill-typed fields raise ConfigError.
SystemConfig system_from_json(const nlohmann::json &j);
RunConfig run_from_json(const nlohmann::json &j);
PulseSource source_from_json(const nlohmann::json &j);

/// 64-bit FNV-1a over the canonical JSON of the physical configuration
/// (the name is excluded), as 16 lowercase hex digits.
std::string fingerprint(const SystemConfig &config);

} // namespace binflux
