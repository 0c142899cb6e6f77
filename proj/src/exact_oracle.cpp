#include "binflux/exact_oracle.hpp"

#include "binflux/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace binflux {

namespace {

// Largest number of occupancy vectors fock_click_distribution will visit.
constexpr double kMaxOccupancies = 5e7;

double binomial_coefficient(double n, double k) {
  double r = 1.0;
  for (double i = 1.0; i <= k; i += 1.0)
    r = r * (n - k + i) / i;
  return r;
}

void require_bin_independence(const DetectorSpec &det, const char *who) {
  if (det.is_mechanistic())
    throw UnsupportedModelError(std::string(who) +
                                ": mechanistic undershoot correlates neighbouring bins and has "
                                "no closed form; use the Monte Carlo method instead");
}

} // namespace

double ClickDistribution::mean() const noexcept {
  double m = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n)
    m += double(n) * probs[n];
  return m;
}

double ClickDistribution::sum() const noexcept {
  return std::accumulate(probs.begin(), probs.end(), 0.0);
}

std::vector<double> poisson_binomial(std::span<const double> success_probs) {
  std::vector<double> dist(success_probs.size() + 1, 0.0);
  dist[0] = 1.0;
  std::size_t filled = 0;
  for (double p : success_probs) {
    ++filled;
    for (std::size_t n = filled; n > 0; --n)
      dist[n] = dist[n] * (1.0 - p) + dist[n - 1] * p;
    dist[0] *= 1.0 - p;
  }
  return dist;
}

std::vector<double> coherent_click_probabilities(double mu, const BinWeights &weights,
                                                 const DetectorSpec &det) {
  const double eta = effective_efficiency(det, mu);
  std::vector<double> p(weights.bins());
  for (std::size_t b = 0; b < p.size(); ++b) {
    const double dark = det.dark_prob_per_gate.at(std::size_t(weights.detector_of_bin[b]));
    // 1 - (1-d) e^{-x}, written to keep precision when x and d are tiny.
    const double x = mu * weights.weights[b] * eta;
    p[b] = -std::expm1(-x) + dark * std::exp(-x);
  }
  return p;
}

ClickDistribution coherent_click_distribution(double mu, const BinWeights &weights,
                                              const DetectorSpec &det) {
  validate(det);
  require_bin_independence(det, "coherent_click_distribution");
  if (!std::isfinite(mu) || mu < 0.0)
    throw InputError("coherent_click_distribution: mu must be finite and >= 0");
  const auto p = coherent_click_probabilities(mu, weights, det);
  return ClickDistribution{poisson_binomial(p), Coherent{mu}};
}

ClickDistribution fock_click_distribution(std::uint64_t n_photons, const BinWeights &weights,
                                          const DetectorSpec &det) {
  validate(det);
  require_bin_independence(det, "fock_click_distribution");
  if (n_photons > kFockEnumerationCap)
    throw InputError("fock_click_distribution: n_photons=" + std::to_string(n_photons) +
                     " exceeds the enumeration cap of " + std::to_string(kFockEnumerationCap));
  const std::size_t bins = weights.bins();
  const double occupancies = binomial_coefficient(double(n_photons + bins), double(bins));
  if (occupancies > kMaxOccupancies)
    throw InputError("fock_click_distribution: " + std::to_string(n_photons) + " photons over " +
                     std::to_string(bins) + " bins is too large to enumerate");

  const double eta = effective_efficiency(det, double(n_photons));
  std::vector<double> cell(bins + 1);
  for (std::size_t b = 0; b < bins; ++b)
    cell[b] = weights.weights[b];
  cell[bins] = std::max(0.0, 1.0 - weights.total());

  std::vector<double> dark(bins);
  for (std::size_t b = 0; b < bins; ++b)
    dark[b] = det.dark_prob_per_gate.at(std::size_t(weights.detector_of_bin[b]));

  double n_factorial = 1.0;
  for (std::uint64_t i = 2; i <= n_photons; ++i)
    n_factorial *= double(i);

  ClickDistribution out{std::vector<double>(bins + 1, 0.0), Fock{n_photons}};
  std::vector<std::uint64_t> occupancy(bins + 1, 0);
  std::vector<double> click(bins);

  // Depth-first over cells; `weight` carries prod p_i^k_i / k_i! so far.
  auto visit = [&](auto &&self, std::size_t i, std::uint64_t remaining, double weight) -> void {
    if (i == bins) {
      occupancy[bins] = remaining;
      double w = weight;
      for (std::uint64_t k = 1; k <= remaining; ++k)
        w *= cell[bins] / double(k);
      if (w == 0.0)
        return;
      for (std::size_t b = 0; b < bins; ++b)
        click[b] = click_probability(occupancy[b], eta, dark[b]);
      const auto given = poisson_binomial(click);
      for (std::size_t n = 0; n <= bins; ++n)
        out.probs[n] += n_factorial * w * given[n];
      return;
    }
    double term = weight;
    for (std::uint64_t k = 0; k <= remaining; ++k) {
      if (k > 0)
        term *= cell[i] / double(k);
      occupancy[i] = k;
      self(self, i + 1, remaining - k, term);
    }
  };
  visit(visit, 0, n_photons, 1.0);
  return out;
}

} // namespace binflux
