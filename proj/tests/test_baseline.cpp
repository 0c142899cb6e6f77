#include "binflux/baseline.hpp"
#include "binflux/errors.hpp"
#include "doctest.h"

#include <cmath>
#include <vector>

using namespace binflux;

namespace {

double f_ref(double p) { return std::sqrt(p) / ((1 - p) * std::log(1 / (1 - p))); }

std::vector<double> grid_005() {
  std::vector<double> g;
  for (int i = 2; i <= 18; ++i)
    g.push_back(0.05 * i);
  return g;
}

} // namespace

TEST_CASE("estimator at half detection probability") {
  SinglePixelSpec spec;
  auto e = estimate_mu(500, 1000, spec);
  CHECK(e.mu == doctest::Approx(std::log(2.0) / 0.165));
  CHECK(e.mu == doctest::Approx(4.2008).epsilon(1e-4));
  CHECK(e.delta90 > 0);
  CHECK_THROWS_AS(estimate_mu(0, 1000, spec), BoundaryError);
  CHECK_THROWS_AS(estimate_mu(1000, 1000, spec), BoundaryError);
}

TEST_CASE("small-signal estimator is linear") {
  SinglePixelSpec spec{1.0, 1.0};
  auto e = estimate_mu(1, 100'000, spec);
  CHECK(e.mu == doctest::Approx(1e-5).epsilon(1e-4));
}

TEST_CASE("error bar uses Poisson counting noise") {
  SinglePixelSpec spec;
  const std::uint64_t n = 4000, k = 1000;
  double p = double(k) / double(n);
  auto e = estimate_mu(k, n, spec);
  double sigma = std::sqrt(double(k)) / (double(n) * (1 - p) * 0.165);
  CHECK(e.delta90 == doctest::Approx(1.645 * sigma).epsilon(1e-12));
  CHECK(e.delta90 / e.mu == doctest::Approx(1.645 * f_ref(p) / std::sqrt(double(n))));
}

TEST_CASE("attenuation for half detection") {
  CHECK(attenuation_for(100, 0.165, 0.5) == doctest::Approx(0.0420).epsilon(2e-3));
  auto spec = matched_spec(100, 0.165);
  CHECK(detection_probability(100, spec) == doctest::Approx(0.5));
}

TEST_CASE("relative error factor") {
  CHECK(relative_error_factor(0.45) == doctest::Approx(f_ref(0.45)));
  CHECK(relative_error_factor(0.45) == doctest::Approx(2.040).epsilon(1e-3));
  CHECK(relative_error_factor(0.5) == doctest::Approx(2.040).epsilon(1e-3));
  CHECK(relative_error_factor(0.8) == doctest::Approx(2.779).epsilon(1e-3));
  CHECK(relative_error_factor(0.01) > 9.0);
  CHECK(relative_error_factor(0.999) > 100.0);
}

TEST_CASE("optimal detection probability") {
  auto g = grid_005();
  double best = optimal_detection_probability(g);
  CHECK((std::abs(best - 0.45) < 1e-9 || std::abs(best - 0.5) < 1e-9));
  std::vector<double> half{0.5};
  CHECK(optimal_detection_probability(half) == 0.5);
  std::vector<double> empty;
  CHECK_THROWS_AS(optimal_detection_probability(empty), InputError);
  std::vector<double> bad{0.5, 1.0};
  CHECK_THROWS_AS(optimal_detection_probability(bad), InputError);
}

TEST_CASE("analytic baseline curve") {
  auto spec = matched_spec(100, 0.165);
  auto half = baseline_error_curve(100, spec, 5000, WidthConvention::HalfWidth);
  auto full = baseline_error_curve(100, spec, 5000, WidthConvention::FullWidth);
  CHECK(half[0] == doctest::Approx(1.645 * f_ref(0.5)));
  CHECK(full[99] == doctest::Approx(2 * half[99]));
  for (std::size_t k = 1; k < half.size(); ++k)
    CHECK(half[k] < half[k - 1]);
  CHECK(half[399] * 20 == doctest::Approx(half[0]));
  CHECK(baseline_shots_for(0.1, 0.5, WidthConvention::HalfWidth) ==
        doctest::Approx(1126.5).epsilon(1e-3));
  CHECK(baseline_shots_for(0.1, 0.5, WidthConvention::FullWidth) ==
        doctest::Approx(4506).epsilon(1e-3));
  CHECK_THROWS_AS(baseline_error_curve(4.0, spec, 10, WidthConvention::HalfWidth), InputError);
}

TEST_CASE("monte carlo baseline agrees with the analytic curve") {
  auto spec = matched_spec(50, 0.165);
  auto mc = baseline_error_curve_mc(50, spec, 400, 2000, 9, WidthConvention::HalfWidth);
  auto an = baseline_error_curve(50, spec, 400, WidthConvention::HalfWidth);
  for (std::size_t k : {99u, 199u, 399u}) {
    CHECK(mc.used[k] > 1900);
    CHECK(std::abs(mc.mean[k] - an[k]) < 3 * mc.std_error[k] + 0.01 * an[k]);
  }
}
