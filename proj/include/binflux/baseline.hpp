#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace binflux {

inline constexpr double kZ90 = 1.645;

/// Gated single-pixel APD behind a variable attenuator.
struct SinglePixelSpec {
  double efficiency = 0.165;
  double attenuation = 1.0; ///< alpha, linear transmission in (0,1]
  double z90 = kZ90;
};

/// How a 90 % error bar turns into the "width" that is divided by mu.
///  - HalfWidth: dmu = z * sigma (the one-sided error bar).
///  - FullWidth: dmu = 2 z * sigma (the full two-sided interval, the same
///    quantity as the extent of a multiplexed credible interval).
enum class WidthConvention { HalfWidth, FullWidth };

double width_factor(WidthConvention convention) noexcept;

struct SinglePixelEstimate {
  double mu = 0.0;
  double delta90 = 0.0; ///< z * sigma, with sigma propagated from sqrt(N_det)
};

/// mu = -ln(1 - p) / (eta alpha) with p = n_det / n_gate. The error uses
/// Poisson counting noise on N_det (sqrt(N_det)), not the binomial
/// sqrt(N p (1 - p)); under that model p ~ 0.5 is the optimal operating point.
/// Throws BoundaryError for n_det = 0 or n_det >= n_gate.
SinglePixelEstimate estimate_mu(std::uint64_t n_det, std::uint64_t n_gate,
                                const SinglePixelSpec &spec);

/// Attenuation that puts mean photon number mu at detection probability p.
double attenuation_for(double mu, double efficiency, double p_target);

/// Per-gate relative error factor f(p) = sqrt(p) / ((1 - p) ln(1 / (1 - p))),
/// so that dmu / mu = z f(p) / sqrt(N_gate).
double relative_error_factor(double p);

/// Grid point minimizing relative_error_factor. Throws InputError for an
/// empty grid or points outside (0,1).
double optimal_detection_probability(std::span<const double> grid);

/// Spec whose attenuator puts mu at detection probability p_target.
SinglePixelSpec matched_spec(double mu, double efficiency, double p_target = 0.5);

/// Detection probability per gate, 1 - exp(-mu eta alpha).
double detection_probability(double mu, const SinglePixelSpec &spec);

/// Analytic relative error z f(p) / sqrt(k) after k = 1..max_shots gates
/// (times 2 for FullWidth). With the attenuator matched to a fixed p it does
/// not depend on mu_true. Throws InputError for mu_true <= 4, where no
/// attenuation reaches 50 %.
std::vector<double> baseline_error_curve(double mu_true, const SinglePixelSpec &spec,
                                         std::size_t max_shots, WidthConvention convention);

struct BaselineMcCurve {
  std::vector<double> mean;      ///< mean relative error at k gates
  std::vector<double> std_error; ///< standard error of that mean
  std::vector<std::size_t> used; ///< trials with a defined estimate at k
};

/// Monte Carlo version: Bernoulli clicks, estimate_mu after each gate.
BaselineMcCurve baseline_error_curve_mc(double mu_true, const SinglePixelSpec &spec,
                                        std::size_t max_shots, std::size_t n_trials,
                                        std::uint64_t seed, WidthConvention convention);

/// Gates needed for the analytic curve at detection probability p to reach
/// `target`: (c z f(p) / target)^2 with c = 1 or 2.
double baseline_shots_for(double target, double p, WidthConvention convention,
                          double z90 = kZ90);

} // namespace binflux
