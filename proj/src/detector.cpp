#include "binflux/detector.hpp"

#include "binflux/errors.hpp"

#include <cmath>
#include <string>

namespace binflux {

void validate(const DetectorSpec &spec) {
  if (!(spec.efficiency > 0.0 && spec.efficiency <= 1.0))
    throw ConfigError("detector.efficiency: must lie in (0,1]");
  for (std::size_t i = 0; i < spec.dark_prob_per_gate.size(); ++i) {
    const double d = spec.dark_prob_per_gate[i];
    if (!(d >= 0.0 && d < 1.0))
      throw ConfigError("detector.dark_prob_per_gate[" + std::to_string(i) +
                        "]: must lie in [0,1)");
  }
  if (!(spec.deadtime >= 0.0) || !std::isfinite(spec.deadtime))
    throw ConfigError("detector.deadtime: must be finite and >= 0");
  if (!(spec.gate_width >= 0.0) || !std::isfinite(spec.gate_width))
    throw ConfigError("detector.gate_width: must be finite and >= 0");

  if (const auto *g = std::get_if<GlobalEfficiency>(&spec.undershoot)) {
    if (g->anchors.empty())
      throw ConfigError("detector.undershoot.anchors: at least one anchor required");
    for (std::size_t i = 0; i < g->anchors.size(); ++i) {
      const auto [mu, eta] = g->anchors[i];
      if (!std::isfinite(mu) || mu < 0.0)
        throw ConfigError("detector.undershoot.anchors[" + std::to_string(i) +
                          "]: mu must be finite and >= 0");
      if (!(eta > 0.0 && eta <= 1.0))
        throw ConfigError("detector.undershoot.anchors[" + std::to_string(i) +
                          "]: efficiency must lie in (0,1]");
      if (i > 0 && !(mu > g->anchors[i - 1].first))
        throw ConfigError("detector.undershoot.anchors[" + std::to_string(i) +
                          "]: mu values must be strictly increasing");
    }
  } else if (const auto *mech = std::get_if<MechanisticUndershoot>(&spec.undershoot)) {
    if (!(mech->p_miss_next >= 0.0 && mech->p_miss_next <= 1.0))
      throw ConfigError("detector.undershoot.p_miss_next: must lie in [0,1]");
  }
}

double click_probability(std::size_t photons_in_bin, double eff, double dark) {
  return 1.0 - (1.0 - dark) * std::pow(1.0 - eff, double(photons_in_bin));
}

double effective_efficiency(const DetectorSpec &spec, double mu) {
  const auto *g = std::get_if<GlobalEfficiency>(&spec.undershoot);
  if (!g || g->anchors.empty())
    return spec.efficiency;
  const auto &a = g->anchors;
  if (mu <= a.front().first)
    return a.front().second;
  if (mu >= a.back().first)
    return a.back().second;
  std::size_t hi = 1;
  while (a[hi].first < mu)
    ++hi;
  const auto [mu0, eta0] = a[hi - 1];
  const auto [mu1, eta1] = a[hi];
  const double t = (mu - mu0) / (mu1 - mu0);
  return eta0 + t * (eta1 - eta0);
}

double shot_dark_probability(const DetectorSpec &spec, std::size_t bins_per_apd) {
  if (bins_per_apd < 1)
    throw InputError("shot_dark_probability: bins_per_apd must be >= 1");
  double quiet = 1.0;
  for (double d : spec.dark_prob_per_gate)
    quiet *= std::pow(1.0 - d, double(bins_per_apd));
  return 1.0 - quiet;
}

} // namespace binflux
