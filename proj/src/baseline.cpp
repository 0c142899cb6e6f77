#include "binflux/baseline.hpp"

#include "binflux/errors.hpp"
#include "binflux/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace binflux {

namespace {

void check_spec(const SinglePixelSpec &spec) {
  if (!(spec.efficiency > 0.0 && spec.efficiency <= 1.0))
    throw ConfigError("single_pixel.efficiency: must lie in (0,1]");
  if (!(spec.attenuation > 0.0 && spec.attenuation <= 1.0))
    throw ConfigError("single_pixel.attenuation: must lie in (0,1]");
}

// Below this the attenuator cannot bring p_det,gate up to 50 %.
constexpr double kMinMu = 4.0;

void check_mu(double mu_true) {
  if (!(mu_true > kMinMu))
    throw InputError("baseline: mu_true=" + std::to_string(mu_true) +
                     " not covered; the single-pixel comparison assumes mu > 4");
}

} // namespace

double width_factor(WidthConvention convention) noexcept {
  return convention == WidthConvention::FullWidth ? 2.0 : 1.0;
}

SinglePixelEstimate estimate_mu(std::uint64_t n_det, std::uint64_t n_gate,
                                const SinglePixelSpec &spec) {
  check_spec(spec);
  if (n_det == 0 || n_det >= n_gate)
    throw BoundaryError("estimate_mu: undefined for n_det=" + std::to_string(n_det) +
                        " of n_gate=" + std::to_string(n_gate) + " (need 0 < n_det < n_gate)");
  const double ea = spec.efficiency * spec.attenuation;
  const double p = double(n_det) / double(n_gate);
  SinglePixelEstimate est;
  est.mu = -std::log1p(-p) / ea;
  est.delta90 = spec.z90 * std::sqrt(double(n_det)) / double(n_gate) / ((1.0 - p) * ea);
  return est;
}

double attenuation_for(double mu, double efficiency, double p_target) {
  if (!(mu > 0.0) || !(efficiency > 0.0) || !(p_target > 0.0 && p_target < 1.0))
    throw InputError("attenuation_for: need mu > 0, efficiency > 0, p in (0,1)");
  return -std::log1p(-p_target) / (efficiency * mu);
}

double relative_error_factor(double p) {
  if (!(p > 0.0 && p < 1.0))
    return std::numeric_limits<double>::infinity();
  return std::sqrt(p) / ((1.0 - p) * -std::log1p(-p));
}

double optimal_detection_probability(std::span<const double> grid) {
  if (grid.empty())
    throw InputError("optimal_detection_probability: empty grid");
  double best = grid[0];
  double best_f = std::numeric_limits<double>::infinity();
  for (double p : grid) {
    if (!(p > 0.0 && p < 1.0))
      throw InputError("optimal_detection_probability: grid points must lie in (0,1)");
    const double f = relative_error_factor(p);
    if (f < best_f) {
      best_f = f;
      best = p;
    }
  }
  return best;
}

SinglePixelSpec matched_spec(double mu, double efficiency, double p_target) {
  SinglePixelSpec spec;
  spec.efficiency = efficiency;
  spec.attenuation = attenuation_for(mu, efficiency, p_target);
  if (spec.attenuation > 1.0)
    throw InputError("matched_spec: mu=" + std::to_string(mu) +
                     " is too weak to reach the target detection probability without gain");
  check_spec(spec);
  return spec;
}

double detection_probability(double mu, const SinglePixelSpec &spec) {
  return -std::expm1(-mu * spec.efficiency * spec.attenuation);
}

std::vector<double> baseline_error_curve(double mu_true, const SinglePixelSpec &spec,
                                         std::size_t max_shots, WidthConvention convention) {
  check_spec(spec);
  check_mu(mu_true);
  const double p = detection_probability(mu_true, spec);
  const double scale = width_factor(convention) * spec.z90 * relative_error_factor(p);
  std::vector<double> curve(max_shots);
  for (std::size_t k = 1; k <= max_shots; ++k)
    curve[k - 1] = scale / std::sqrt(double(k));
  return curve;
}

BaselineMcCurve baseline_error_curve_mc(double mu_true, const SinglePixelSpec &spec,
                                        std::size_t max_shots, std::size_t n_trials,
                                        std::uint64_t seed, WidthConvention convention) {
  check_spec(spec);
  check_mu(mu_true);
  const double p_det = detection_probability(mu_true, spec);
  const double factor = width_factor(convention);

  std::vector<double> sum(max_shots, 0.0), sum_sq(max_shots, 0.0);
  BaselineMcCurve out;
  out.used.assign(max_shots, 0);
  for (std::size_t t = 0; t < n_trials; ++t) {
    ShotRng rng(seed, t);
    std::uint64_t clicks = 0;
    for (std::size_t k = 1; k <= max_shots; ++k) {
      clicks += rng.uniform() < p_det;
      if (clicks == 0 || clicks >= k)
        continue;
      const double rel = factor * estimate_mu(clicks, k, spec).delta90 / mu_true;
      sum[k - 1] += rel;
      sum_sq[k - 1] += rel * rel;
      ++out.used[k - 1];
    }
  }
  out.mean.resize(max_shots);
  out.std_error.resize(max_shots);
  for (std::size_t i = 0; i < max_shots; ++i) {
    const double n = double(out.used[i]);
    if (n < 1) {
      out.mean[i] = out.std_error[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    out.mean[i] = sum[i] / n;
    const double var = n > 1 ? (sum_sq[i] - n * out.mean[i] * out.mean[i]) / (n - 1) : 0.0;
    out.std_error[i] = std::sqrt(std::max(var, 0.0) / n);
  }
  return out;
}

double baseline_shots_for(double target, double p, WidthConvention convention, double z90) {
  if (!(target > 0.0))
    throw InputError("baseline_shots_for: target must be positive");
  const double scale = width_factor(convention) * z90 * relative_error_factor(p);
  return (scale / target) * (scale / target);
}

} // namespace binflux
