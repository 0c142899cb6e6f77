#include "binflux/config.hpp"
#include "binflux/errors.hpp"
#include "binflux/exact_oracle.hpp"
#include "binflux/response_matrix.hpp"
#include "doctest.h"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace binflux;

namespace {

DetectorSpec detector(double eta, double d0 = 0.0, double d1 = 0.0) {
  DetectorSpec d;
  d.efficiency = eta;
  d.dark_prob_per_gate = {d0, d1};
  return d;
}

} // namespace

TEST_CASE("fair coins") {
  std::vector<double> p{0.5, 0.5};
  auto d = poisson_binomial(p);
  CHECK(d[0] == doctest::Approx(0.25));
  CHECK(d[1] == doctest::Approx(0.5));
  CHECK(d[2] == doctest::Approx(0.25));
}

TEST_CASE("convolution matches subset enumeration") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> p(1 + rep % 14);
    for (auto &x : p)
      x = u(rng);
    auto fast = poisson_binomial(p);
    auto slow = oracle::poisson_binomial_by_subsets(p);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t k = 0; k < fast.size(); ++k)
      CHECK(fast[k] == doctest::Approx(slow[k]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("moments and permutation invariance") {
  std::vector<double> p{0.1, 0.9, 0.35, 0.5, 0.02, 0.77, 0.6};
  auto d = poisson_binomial(p);
  double mean = 0, var = 0;
  for (std::size_t k = 0; k < d.size(); ++k)
    mean += double(k) * d[k];
  for (std::size_t k = 0; k < d.size(); ++k)
    var += (double(k) - mean) * (double(k) - mean) * d[k];
  double mean_ref = std::accumulate(p.begin(), p.end(), 0.0);
  double var_ref = 0;
  for (double x : p)
    var_ref += x * (1 - x);
  CHECK(mean == doctest::Approx(mean_ref).epsilon(1e-12));
  CHECK(var == doctest::Approx(var_ref).epsilon(1e-12));
  std::reverse(p.begin(), p.end());
  std::swap(p[1], p[4]);
  auto e = poisson_binomial(p);
  for (std::size_t k = 0; k < d.size(); ++k)
    CHECK(e[k] == doctest::Approx(d[k]).epsilon(1e-13).scale(1.0));
}

TEST_CASE("coherent law corner cases") {
  auto w = build_bin_weights(MultiplexerSpec::ideal({1, 2}));
  auto d = coherent_click_distribution(0.0, w, detector(0.5));
  CHECK(d.probs[0] == 1.0);
  auto cfg = preset_rapid32();
  auto r = coherent_click_distribution(50, cfg.weights(), cfg.detector);
  CHECK(r.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.bins() == 32);
  auto probs = coherent_click_probabilities(50, cfg.weights(), cfg.detector);
  CHECK(r.mean() == doctest::Approx(std::accumulate(probs.begin(), probs.end(), 0.0)));
}

TEST_CASE("coherent per-bin probabilities") {
  auto cfg = preset_rapid32();
  auto w = cfg.weights();
  auto probs = coherent_click_probabilities(100, w, cfg.detector);
  double eta = effective_efficiency(cfg.detector, 100);
  for (std::size_t b = 0; b < w.bins(); ++b) {
    double dark = cfg.detector.dark_prob_per_gate[std::size_t(w.detector_of_bin[b])];
    CHECK(probs[b] ==
          doctest::Approx(1.0 - (1.0 - dark) * std::exp(-100 * w.weights[b] * eta)));
  }
}

TEST_CASE("mechanistic undershoot has no closed form") {
  auto cfg = preset_rapid32();
  cfg.detector.undershoot = MechanisticUndershoot{0.2};
  CHECK_THROWS_AS(coherent_click_distribution(10, cfg.weights(), cfg.detector),
                  UnsupportedModelError);
}

TEST_CASE("fock law corner cases") {
  auto w4 = build_bin_weights(MultiplexerSpec::ideal({1}));
  auto d0 = fock_click_distribution(0, w4, detector(0.5));
  CHECK(d0.probs[0] == 1.0);
  auto d1 = fock_click_distribution(1, w4, detector(1.0));
  CHECK(d1.probs[1] == doctest::Approx(1.0));
  auto d2 = fock_click_distribution(2, w4, detector(1.0));
  CHECK(d2.probs[0] == doctest::Approx(0.0));
  CHECK(d2.probs[1] == doctest::Approx(0.25));
  CHECK(d2.probs[2] == doctest::Approx(0.75));
  CHECK_THROWS_AS(fock_click_distribution(kFockEnumerationCap + 1, w4, detector(1.0)),
                  InputError);
}

TEST_CASE("coherent law is a Poisson mixture of fock laws") {
  std::vector<MultiplexerSpec> specs;
  specs.push_back(MultiplexerSpec::ideal({1.0}, 0.7));
  MultiplexerSpec skew;
  skew.loop_delays = {1.0};
  skew.coupler_ratios = {0.3, 0.65};
  skew.transmission = ExplicitTransmission{{0.9, 0.8, 0.95, 0.6}};
  specs.push_back(skew);
  specs.push_back(MultiplexerSpec::ideal({}, 0.2));
  auto det = detector(0.4, 1e-3, 5e-3);
  for (const auto &spec : specs) {
    auto w = build_bin_weights(spec);
    for (double mu : {0.3, 1.0, 2.0}) {
      auto coh = coherent_click_distribution(mu, w, det);
      std::vector<double> mix(coh.probs.size(), 0.0);
      for (std::uint64_t k = 0; k <= kFockEnumerationCap; ++k) {
        auto f = fock_click_distribution(k, w, det);
        double pk = oracle::poisson_pmf(k, mu);
        for (std::size_t n = 0; n < mix.size(); ++n)
          mix[n] += pk * f.probs[n];
      }
      CHECK(total_variation(coh.probs, mix) < 1e-6);
    }
  }
}
