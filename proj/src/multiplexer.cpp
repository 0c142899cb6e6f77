#include "binflux/multiplexer.hpp"

#include "binflux/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace binflux {

namespace {

// Loop count above which 2^(m+1) bins stops being a sensible detector.
constexpr std::size_t kMaxLoops = 20;

// Relative slack when comparing sums of delays against the deadtime.
constexpr double kTimingSlack = 1e-9;

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

MultiplexerSpec MultiplexerSpec::ideal(std::vector<double> delays, double loss_db) {
  MultiplexerSpec spec;
  spec.coupler_ratios.assign(delays.size() + 1, 0.5);
  spec.loop_delays = std::move(delays);
  spec.transmission = UniformLoss{loss_db};
  return spec;
}

double BinWeights::total() const noexcept {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void validate(const MultiplexerSpec &spec) {
  const std::size_t m = spec.loops();
  if (m > kMaxLoops)
    throw ConfigError("multiplexer.loop_delays: at most " + std::to_string(kMaxLoops) +
                      " loops supported");
  for (std::size_t i = 0; i < m; ++i) {
    const double d = spec.loop_delays[i];
    if (!std::isfinite(d) || d <= 0.0)
      throw ConfigError("multiplexer.loop_delays[" + std::to_string(i) +
                        "]: delay must be positive and finite");
  }
  if (spec.coupler_ratios.size() != m + 1)
    throw ConfigError("multiplexer.coupler_ratios: expected " + std::to_string(m + 1) +
                      " ratios for " + std::to_string(m) + " loops, got " +
                      std::to_string(spec.coupler_ratios.size()));
  for (std::size_t i = 0; i < spec.coupler_ratios.size(); ++i) {
    const double r = spec.coupler_ratios[i];
    if (!(r > 0.0 && r < 1.0))
      throw ConfigError("multiplexer.coupler_ratios[" + std::to_string(i) +
                        "]: ratio must lie strictly in (0,1)");
  }

  const std::size_t bins = spec.bins();
  std::visit(overloaded{
                 [](const UniformLoss &u) {
                   if (!std::isfinite(u.avg_loss_db) || u.avg_loss_db < 0.0)
                     throw ConfigError(
                         "multiplexer.transmission.uniform_loss_db: must be finite and >= 0");
                 },
                 [bins](const ExplicitTransmission &e) {
                   if (e.transmissions.size() != bins)
                     throw ConfigError("multiplexer.transmission.explicit: expected " +
                                       std::to_string(bins) + " entries");
                   for (std::size_t b = 0; b < bins; ++b) {
                     const double t = e.transmissions[b];
                     if (!(t > 0.0 && t <= 1.0))
                       throw ConfigError("multiplexer.transmission.explicit[" +
                                         std::to_string(b) + "]: must lie in (0,1]");
                   }
                 },
             },
             spec.transmission);

  if (const auto *ex = std::get_if<ExplicitAssignment>(&spec.assignment)) {
    if (ex->detector_of_bin.size() != bins)
      throw ConfigError("multiplexer.detector_assignment: expected " + std::to_string(bins) +
                        " entries");
    std::size_t on_first = 0;
    for (std::size_t b = 0; b < bins; ++b) {
      const int apd = ex->detector_of_bin[b];
      if (apd != 0 && apd != 1)
        throw ConfigError("multiplexer.detector_assignment[" + std::to_string(b) +
                          "]: APD index must be 0 or 1");
      on_first += apd == 0;
    }
    if (on_first != bins / 2)
      throw ConfigError("multiplexer.detector_assignment: each APD must receive exactly " +
                        std::to_string(bins / 2) + " bins");
  }
}

BinWeights build_bin_weights(const MultiplexerSpec &spec) {
  validate(spec);
  const std::size_t m = spec.loops();
  const std::size_t bins = spec.bins();

  BinWeights out;
  out.weights.resize(bins);
  out.arrival_times.resize(bins);
  out.detector_of_bin.resize(bins);

  const double uniform_t = std::visit(
      overloaded{[](const UniformLoss &u) { return std::pow(10.0, -u.avg_loss_db / 10.0); },
                 [](const ExplicitTransmission &) { return 0.0; }},
      spec.transmission);
  const auto *explicit_t = std::get_if<ExplicitTransmission>(&spec.transmission);
  const auto *explicit_apd = std::get_if<ExplicitAssignment>(&spec.assignment);

  for (std::size_t b = 0; b < bins; ++b) {
    const bool final_port = (b & 1u) != 0;
    double p = final_port ? spec.coupler_ratios[m] : 1.0 - spec.coupler_ratios[m];
    double t = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const bool delayed = ((b >> (c + 1)) & 1u) != 0;
      p *= delayed ? spec.coupler_ratios[c] : 1.0 - spec.coupler_ratios[c];
      if (delayed)
        t += spec.loop_delays[c];
    }
    out.weights[b] = p * (explicit_t ? explicit_t->transmissions[b] : uniform_t);
    out.arrival_times[b] = t;
    out.detector_of_bin[b] = explicit_apd ? explicit_apd->detector_of_bin[b] : int(final_port);
  }
  return out;
}

TimingReport validate_timing(const BinWeights &weights, double deadtime, double guard) {
  TimingReport report;
  report.min_spacing = std::numeric_limits<double>::infinity();
  for (int apd = 0; apd < 2; ++apd) {
    std::vector<double> times;
    for (std::size_t b = 0; b < weights.bins(); ++b)
      if (weights.detector_of_bin[b] == apd)
        times.push_back(weights.arrival_times[b]);
    std::sort(times.begin(), times.end());
    for (std::size_t i = 1; i < times.size(); ++i)
      report.min_spacing = std::min(report.min_spacing, times[i] - times[i - 1]);
  }
  const double last = weights.arrival_times.empty()
                          ? 0.0
                          : *std::max_element(weights.arrival_times.begin(),
                                              weights.arrival_times.end());
  report.train_length = last + guard;
  report.max_rep_rate = report.train_length > 0.0 ? 1.0 / report.train_length
                                                  : std::numeric_limits<double>::infinity();
  report.deadtime_violation = report.min_spacing < deadtime * (1.0 - kTimingSlack);
  return report;
}

} // namespace binflux
