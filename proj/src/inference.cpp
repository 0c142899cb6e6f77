#include "binflux/inference.hpp"

#include "binflux/errors.hpp"
#include "binflux/mc_engine.hpp"
#include "binflux/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace binflux {

namespace {

// Log of every normalized single-shot posterior column, -inf where zero.
class LogColumns {
public:
  explicit LogColumns(const ResponseMatrix &m) : rows_(m.rows.size()), table_(m.bins + 1) {
    for (std::size_t n = 0; n <= m.bins; ++n) {
      auto col = m.column(n);
      double total = 0.0;
      for (double p : col)
        total += p;
      auto &out = table_[n];
      out.resize(col.size());
      for (std::size_t mu = 0; mu < col.size(); ++mu)
        out[mu] = total > 0.0 && col[mu] > 0.0 ? std::log(col[mu] / total)
                                               : -std::numeric_limits<double>::infinity();
    }
  }

  const std::vector<double> &operator[](std::size_t n) const { return table_.at(n); }
  std::size_t rows() const noexcept { return rows_; }

private:
  std::size_t rows_;
  std::vector<std::vector<double>> table_;
};

Posterior normalize_log(const std::vector<double> &log_post) {
  const double peak = *std::max_element(log_post.begin(), log_post.end());
  if (!std::isfinite(peak))
    throw DegenerateEvidenceError(
        "posterior: observations are impossible for every mu in [0, mu_max]");
  Posterior post;
  post.probs.resize(log_post.size());
  double total = 0.0;
  for (std::size_t mu = 0; mu < log_post.size(); ++mu) {
    post.probs[mu] = std::exp(log_post[mu] - peak);
    total += post.probs[mu];
  }
  post.normalization = 0.0;
  for (double &p : post.probs) {
    p /= total;
    post.normalization += p;
  }
  post.mode = int(std::max_element(post.probs.begin(), post.probs.end()) - post.probs.begin());
  return post;
}

void check_observation(const ResponseMatrix &m, std::size_t n,
                       std::optional<std::size_t> max_admissible_n) {
  if (n > m.bins)
    throw InputError("observation n=" + std::to_string(n) + " exceeds the bin count " +
                     std::to_string(m.bins));
  if (max_admissible_n && n > *max_admissible_n)
    throw RejectedObservationError(
        "observation n=" + std::to_string(n) + " rejected: above the stability cutoff n <= " +
        std::to_string(*max_admissible_n) + " for mu_max=" + std::to_string(m.mu_max) +
        " (the posterior would depend on the truncation at mu_max)");
}

double quantile_sorted(const std::vector<double> &sorted, double q) {
  if (sorted.empty())
    return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * double(sorted.size() - 1);
  const auto i = std::size_t(std::floor(pos));
  const double frac = pos - double(i);
  if (i + 1 >= sorted.size())
    return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

} // namespace

Posterior posterior_single(const ResponseMatrix &m, std::size_t n) {
  check_observation(m, n, std::nullopt);
  const auto col = m.column(n);
  double total = 0.0;
  for (double p : col)
    total += p;
  if (!(total > 0.0))
    throw DegenerateEvidenceError("posterior_single: column n=" + std::to_string(n) +
                                  " of the response matrix is identically zero");
  Posterior post;
  post.probs.resize(col.size());
  for (std::size_t mu = 0; mu < col.size(); ++mu) {
    post.probs[mu] = col[mu] / total;
    post.normalization += post.probs[mu];
  }
  post.mode = int(std::max_element(post.probs.begin(), post.probs.end()) - post.probs.begin());
  return post;
}

Posterior posterior_multi(const ResponseMatrix &m, std::span<const std::size_t> observations,
                          std::optional<std::size_t> max_admissible_n) {
  if (observations.empty())
    throw InputError("posterior_multi: at least one observation required");
  for (std::size_t n : observations)
    check_observation(m, n, max_admissible_n);
  if (observations.size() == 1)
    return posterior_single(m, observations[0]);

  const LogColumns logs(m);
  std::vector<double> acc(logs.rows(), 0.0);
  for (std::size_t n : observations) {
    const auto &col = logs[n];
    for (std::size_t mu = 0; mu < acc.size(); ++mu)
      acc[mu] += col[mu];
  }
  return normalize_log(acc);
}

CredibleInterval credible_interval(const Posterior &post, double level) {
  if (post.probs.empty())
    throw InputError("credible_interval: empty posterior");
  if (!(level > 0.0 && level <= 1.0))
    throw InputError("credible_interval: level must lie in (0,1]");
  const auto &p = post.probs;
  const int last = int(p.size()) - 1;

  CredibleInterval ci;
  ci.level = level;
  ci.mode = post.mode;
  ci.lo = ci.hi = post.mode;
  ci.mass = p[std::size_t(post.mode)];
  while (ci.mass < level && (ci.lo > 0 || ci.hi < last)) {
    const double left = ci.lo > 0 ? p[std::size_t(ci.lo - 1)] : -1.0;
    const double right = ci.hi < last ? p[std::size_t(ci.hi + 1)] : -1.0;
    if (left >= right) {
      --ci.lo;
      ci.mass += left;
    } else {
      ++ci.hi;
      ci.mass += right;
    }
  }
  return ci;
}

std::optional<std::size_t> stability_max_n(const ResponseMatrix &at_mu_max,
                                           const ResponseMatrix &at_double, double tolerance) {
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw InputError("stability_max_n: tolerance must lie in (0,1)");
  if (at_mu_max.bins != at_double.bins)
    throw InputError("stability_max_n: matrices disagree on the bin count");
  std::optional<std::size_t> best;
  for (std::size_t n = 0; n <= at_mu_max.bins; ++n) {
    double tv = 1.0;
    try {
      const auto a = posterior_single(at_mu_max, n);
      const auto b = posterior_single(at_double, n);
      tv = total_variation(a.probs, b.probs);
    } catch (const DegenerateEvidenceError &) {
      tv = 1.0;
    }
    if (!(tv < tolerance))
      break;
    best = n;
  }
  return best;
}

std::optional<std::size_t> stability_max_n(const SystemConfig &config, int mu_max,
                                           double tolerance) {
  const auto a = build_matrix(config, mu_max);
  const auto b = build_matrix(config, 2 * mu_max);
  return stability_max_n(a, b, tolerance);
}

double interval_to_energy(double width_photons, double wavelength) {
  if (!(wavelength > 0.0))
    throw InputError("interval_to_energy: wavelength must be positive");
  return width_photons * kPlanck * kSpeedOfLight / wavelength;
}

RelativeErrorCurve relative_error_curve(const SystemConfig &config, const ResponseMatrix &m,
                                        double mu_true, std::size_t max_shots,
                                        std::size_t n_trials, std::uint64_t seed,
                                        std::optional<std::size_t> max_admissible_n,
                                        const RelativeErrorOptions &options) {
  if (!(mu_true > 0.0) || mu_true > double(m.mu_max))
    throw InputError("relative_error_curve: mu_true must lie in (0, mu_max]");
  if (max_shots < 1 || n_trials < 1)
    throw InputError("relative_error_curve: max_shots and n_trials must be >= 1");
  if (m.bins != config.weights().bins())
    throw InputError("relative_error_curve: matrix and configuration disagree on the bin count");

  const LogColumns logs(m);
  const ShotSimulator sim(Coherent{mu_true}, config.weights(), config.detector);
  const std::size_t limit = max_admissible_n.value_or(m.bins);

  RelativeErrorCurve out;
  out.mu_true = mu_true;
  out.trials.assign(n_trials, std::vector<double>(max_shots));
  std::vector<std::uint64_t> rejected(n_trials, 0);

  auto run_trial = [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_key(seed, t);
    std::vector<double> acc(logs.rows(), 0.0);
    std::uint64_t index = 0;
    for (std::size_t k = 0; k < max_shots; ++k) {
      std::size_t n = sim.count_clicks(trial_seed, index++);
      while (n > limit) {
        ++rejected[t];
        n = sim.count_clicks(trial_seed, index++);
      }
      const auto &col = logs[n];
      for (std::size_t mu = 0; mu < acc.size(); ++mu)
        acc[mu] += col[mu];
      const auto ci = credible_interval(normalize_log(acc), options.level);
      out.trials[t][k] = double(ci.extent()) / mu_true;
    }
  };

  unsigned threads = options.threads ? options.threads : default_thread_count();
  threads = unsigned(std::min<std::size_t>(threads, n_trials));
  if (threads <= 1) {
    for (std::size_t t = 0; t < n_trials; ++t)
      run_trial(t);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < n_trials; t += threads)
          run_trial(t);
      });
  }

  out.median.resize(max_shots);
  out.q10.resize(max_shots);
  out.q90.resize(max_shots);
  std::vector<double> column(n_trials);
  for (std::size_t k = 0; k < max_shots; ++k) {
    for (std::size_t t = 0; t < n_trials; ++t)
      column[t] = out.trials[t][k];
    std::sort(column.begin(), column.end());
    out.median[k] = quantile_sorted(column, 0.5);
    out.q10[k] = quantile_sorted(column, 0.1);
    out.q90[k] = quantile_sorted(column, 0.9);
  }
  for (auto r : rejected)
    out.rejected_shots += r;
  return out;
}

std::optional<std::size_t> shots_to_reach(std::span<const double> curve, double threshold) {
  for (std::size_t k = 0; k < curve.size(); ++k)
    if (curve[k] <= threshold)
      return k + 1;
  return std::nullopt;
}

double median_shots_to_reach(const RelativeErrorCurve &curve, double threshold) {
  std::vector<double> shots;
  shots.reserve(curve.trials.size());
  for (const auto &trial : curve.trials)
    shots.push_back(double(shots_to_reach(trial, threshold).value_or(trial.size() + 1)));
  std::sort(shots.begin(), shots.end());
  return quantile_sorted(shots, 0.5);
}

} // namespace binflux
