// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "binflux/baseline.hpp"
#include "binflux/config.hpp"
#include "binflux/errors.hpp"
#include "binflux/exact_oracle.hpp"
#include "binflux/inference.hpp"
#include "binflux/mc_engine.hpp"
#include "binflux/response_matrix.hpp"
#include "binflux/rng.hpp"
#include "binflux/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace binflux;

namespace {

int failures = 0;

void report(int id, const std::string &name, bool ok, const std::string &detail) {
  std::printf("[%s] criterion %d: %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok)
    ++failures;
}

template <class... Args> std::string fmt(const char *f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double poisson_pmf(std::uint64_t k, double mu) {
  return std::exp(double(k) * std::log(mu) - mu - std::lgamma(double(k) + 1.0));
}

void oracle_equivalence() {
  auto t0 = std::chrono::steady_clock::now();
  double worst_p = 1.0;
  std::string worst;
  bool ok = true;
  for (const char *name : {"rapid32", "conventional16"}) {
    auto cfg = preset(name);
    auto w = cfg.weights();
    for (double mu : {1.0, 10.0, 50.0, 100.0, 400.0}) {
      auto exact = coherent_click_distribution(mu, w, cfg.detector);
      auto mc = simulate_batch(Coherent{mu}, w, cfg.detector, 1'000'000,
                               derive_key(0xACCE, std::uint64_t(mu)));
      auto gof = chi_square_gof(mc.histogram, exact.probs);
      if (gof.p_value < 0.001)
        ok = false;
      if (gof.p_value < worst_p) {
        worst_p = gof.p_value;
        worst = fmt("%s mu=%g chi2=%.2f dof=%d", name, mu, gof.statistic, gof.dof);
      }
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(1, "MC vs exact chi-square at 0.001, 2 presets x 5 mu, 1e6 shots", ok && secs < 60,
         fmt("min p=%.4g (%s), %.1f s", worst_p, worst.c_str(), secs));
}

void single_shot(const ResponseMatrix &m) {
  auto post = posterior_single(m, 1);
  auto ci = credible_interval(post, 0.90);
  double energy = interval_to_energy(ci.extent(), kTelecomWavelength);
  bool ok = std::abs(post.mode - 8) <= 3 && std::abs(ci.extent() - 33) <= 10 &&
            std::abs(energy / 4.2e-18 - 1.0) <= 0.30;
  report(2, "single-shot n=1 resolution", ok,
         fmt("mode=%d, 90%% HPD=[%d,%d] extent=%d, energy=%.3g J", post.mode, ci.lo, ci.hi,
             ci.extent(), energy));
}

std::optional<std::size_t> stability(const ResponseMatrix &m) {
  auto cfg = preset_rapid32();
  auto twice = build_matrix(cfg, 800);
  auto cut = stability_max_n(m, twice, 0.01);
  bool ok = cut && *cut >= 14 && *cut <= 16;
  report(3, "stability cutoff at mu_max=400, TV 0.01", ok,
         cut ? fmt("max admissible n=%zu", *cut) : std::string("none"));
  return cut;
}

double multi_shot(const ResponseMatrix &m, std::optional<std::size_t> cut) {
  auto curve = relative_error_curve(preset_rapid32(), m, 100, 400, 100, 0x5EED, cut);
  double med = median_shots_to_reach(curve, 0.1);
  report(4, "median shots to 0.1 relative error at mu=100 (100 trials)",
         med >= 105 && med <= 195,
         fmt("median=%g shots, %llu rejected shots resampled", med,
             static_cast<unsigned long long>(curve.rejected_shots)));
  return med;
}

void baseline_ratio(double multiplexed) {
  double half = baseline_shots_for(0.1, 0.5, WidthConvention::HalfWidth);
  double full = baseline_shots_for(0.1, 0.5, WidthConvention::FullWidth);
  double r_half = half / multiplexed, r_full = full / multiplexed;
  report(5, "shot reduction vs single pixel (full-width convention in [20,45])",
         r_full >= 20 && r_full <= 45,
         fmt("multiplexed=%g; half-width %0.f shots, ratio %.1f; full-width %.0f shots, "
             "ratio %.1f",
             multiplexed, half, r_half, full, r_full));
}

void dark_sanity() {
  auto cfg = preset_rapid32();
  double p = shot_dark_probability(cfg.detector, cfg.multiplexer.bins() / 2);
  report(6, "rapid32 dark count per shot", p >= 9.0e-4 && p <= 1.05e-3, fmt("p=%.4g", p));
}

void timing() {
  auto conv = preset_conventional16().timing();
  auto rapid = preset_rapid32().timing();
  bool ok = std::abs(conv.train_length - 45e-6) < 1e-12 &&
            std::round(conv.max_rep_rate / 1e3) == 22 && !conv.deadtime_violation &&
            rapid.train_length <= 167e-9 && rapid.max_rep_rate >= 6e6 &&
            !rapid.deadtime_violation;
  report(7, "timing from preset delays", ok,
         fmt("conventional16 train=%.3g s rate=%.0f Hz; rapid32 train=%.4g s rate=%.4g Hz",
             conv.train_length, conv.max_rep_rate, rapid.train_length, rapid.max_rep_rate));
}

void optimal_p() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i)
    grid.push_back(0.05 * i);
  double p = optimal_detection_probability(grid);
  bool ok = std::abs(p - 0.45) < 1e-9 || std::abs(p - 0.5) < 1e-9;
  report(8, "optimal single-pixel detection probability", ok, fmt("argmin p=%.2f", p));
}

void properties(const ResponseMatrix &m) {
  auto cfg = preset_rapid32();
  auto w = cfg.weights();

  // Calibration: mu drawn from the uniform prior, one shot each.
  std::vector<CredibleInterval> by_n;
  for (std::size_t n = 0; n <= m.bins; ++n) {
    try {
      by_n.push_back(credible_interval(posterior_single(m, n), 0.90));
    } catch (const DegenerateEvidenceError &) {
      by_n.push_back(CredibleInterval{0.90, 0, 1, 0, 0});
    }
  }
  std::vector<ShotSimulator> sims;
  for (int mu = 0; mu <= m.mu_max; ++mu)
    sims.emplace_back(Coherent{double(mu)}, w, cfg.detector);
  const std::uint64_t pairs = 100'000, seed = 0xCA11B;
  std::uint64_t covered = 0;
  for (std::uint64_t i = 0; i < pairs; ++i) {
    ShotRng pick(seed, i);
    int mu = int(pick.uniform() * double(m.mu_max + 1));
    auto n = sims[std::size_t(mu)].count_clicks(derive_key(seed, 1), i);
    covered += mu >= by_n[n].lo && mu <= by_n[n].hi;
  }
  double coverage = double(covered) / double(pairs);

  double worst_norm = 0.0;
  for (const auto &name : preset_names()) {
    auto mm = build_matrix(preset(name), 400);
    for (const auto &row : mm.rows)
      worst_norm = std::max(worst_norm, std::abs(row.sum() - 1.0));
  }

  BatchOptions one{true, 1}, many{true, 3};
  auto a = simulate_batch(Coherent{50}, w, cfg.detector, 50'000, 7, one);
  auto b = simulate_batch(Coherent{50}, w, cfg.detector, 50'000, 7, many);
  bool same = a.histogram == b.histogram && a.records.size() == b.records.size();
  for (std::size_t i = 0; same && i < a.records.size(); ++i)
    same = a.records[i].pattern == b.records[i].pattern;
  std::ostringstream s1, s2;
  write_matrix_csv(build_matrix(cfg, 100, MonteCarloMethod{2000, 3}), s1);
  write_matrix_csv(build_matrix(cfg, 100, MonteCarloMethod{2000, 3}), s2);
  same = same && s1.str() == s2.str();

  DetectorSpec det;
  det.efficiency = 0.4;
  det.dark_prob_per_gate = {1e-3, 5e-3};
  std::vector<MultiplexerSpec> small{MultiplexerSpec::ideal({}, 0.3),
                                     MultiplexerSpec::ideal({1.0}, 0.5)};
  small.push_back(small.back());
  small.back().coupler_ratios = {0.3, 0.65};
  double worst_tv = 0.0;
  for (const auto &spec : small) {
    auto ww = build_bin_weights(spec);
    for (double mu : {0.5, 1.0, 2.0}) {
      auto coh = coherent_click_distribution(mu, ww, det);
      std::vector<double> mix(coh.probs.size(), 0.0);
      for (std::uint64_t k = 0; k <= kFockEnumerationCap; ++k) {
        auto f = fock_click_distribution(k, ww, det);
        for (std::size_t n = 0; n < mix.size(); ++n)
          mix[n] += poisson_pmf(k, mu) * f.probs[n];
      }
      worst_tv = std::max(worst_tv, total_variation(coh.probs, mix));
    }
  }

  bool ok = coverage >= 0.88 && worst_norm <= 1e-9 && same && worst_tv <= 1e-6;
  report(9, "property suite", ok,
         fmt("coverage=%.4f over %llu pairs, max |row sum-1|=%.2g, deterministic=%s, "
             "mixing TV=%.2g",
             coverage, static_cast<unsigned long long>(pairs), worst_norm,
             same ? "yes" : "no", worst_tv));
}

void guarded(int id, const std::function<void()> &f) {
  try {
    f();
  } catch (const std::exception &e) {
    report(id, "exception", false, e.what());
  }
}

} // namespace

int main() {
  auto m = build_matrix(preset_rapid32(), 400);
  std::optional<std::size_t> cut;
  double median = 0;
  guarded(1, oracle_equivalence);
  guarded(2, [&] { single_shot(m); });
  guarded(3, [&] { cut = stability(m); });
  guarded(4, [&] { median = multi_shot(m, cut); });
  guarded(5, [&] { baseline_ratio(median); });
  guarded(6, dark_sanity);
  guarded(7, timing);
  guarded(8, optimal_p);
  guarded(9, [&] { properties(m); });
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
