#include "binflux/mc_engine.hpp"

#include "binflux/errors.hpp"
#include "binflux/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace binflux {

namespace {

// Above this mean the inversion sampler walks too many terms.
constexpr double kInversionLimit = 30.0;

std::uint32_t sample_poisson(ShotRng &rng, double lambda, double empty_prob) {
  if (lambda <= 0.0)
    return 0;
  if (lambda < kInversionLimit) {
    const double u = rng.uniform();
    double term = empty_prob;
    double cdf = term;
    std::uint32_t k = 0;
    while (u >= cdf) {
      ++k;
      term *= lambda / k;
      cdf += term;
      if (term == 0.0)
        break;
    }
    return k;
  }
  std::poisson_distribution<std::uint32_t> dist(lambda);
  return dist(rng);
}

} // namespace

double source_intensity(const PulseSource &source) {
  if (const auto *c = std::get_if<Coherent>(&source))
    return c->mu;
  return double(std::get<Fock>(source).n_photons);
}

ShotSimulator::ShotSimulator(const PulseSource &source, const BinWeights &weights,
                             const DetectorSpec &det, std::uint64_t fock_cap)
    : source_(source), weights_(weights) {
  validate(det);
  const std::size_t bins = weights_.bins();
  if (bins == 0 || weights_.arrival_times.size() != bins || weights_.detector_of_bin.size() != bins)
    throw InputError("simulate: bin weights are empty or inconsistent");

  if (const auto *c = std::get_if<Coherent>(&source_)) {
    if (!std::isfinite(c->mu) || c->mu < 0.0)
      throw InputError("source.mu: must be finite and >= 0");
  } else if (std::get<Fock>(source_).n_photons > fock_cap) {
    throw InputError("source.n_photons: " + std::to_string(std::get<Fock>(source_).n_photons) +
                     " exceeds the Fock cap of " + std::to_string(fock_cap));
  }

  eta_eff_ = effective_efficiency(det, source_intensity(source_));
  if (const auto *mech = std::get_if<MechanisticUndershoot>(&det.undershoot)) {
    mechanistic_ = true;
    p_miss_next_ = mech->p_miss_next;
  }

  order_.resize(bins);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return weights_.arrival_times[a] < weights_.arrival_times[b];
  });

  dark_.resize(bins);
  for (std::size_t b = 0; b < bins; ++b)
    dark_[b] = det.dark_prob_per_gate.at(std::size_t(weights_.detector_of_bin[b]));

  if (const auto *c = std::get_if<Coherent>(&source_)) {
    lambda_.resize(bins);
    empty_prob_.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      lambda_[b] = c->mu * weights_.weights[b] * eta_eff_;
      empty_prob_[b] = std::exp(-lambda_[b]);
    }
  } else {
    cell_cdf_.resize(bins);
    double acc = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      acc += weights_.weights[b] * eta_eff_;
      cell_cdf_[b] = acc;
    }
  }
}

template <class Sink>
void ShotSimulator::run(std::uint64_t seed, std::uint64_t shot_index, Sink &&sink) const {
  ShotRng rng(seed, shot_index);
  const std::size_t bins = weights_.bins();

  std::vector<std::uint32_t> routed;
  if (const auto *f = std::get_if<Fock>(&source_)) {
    routed.assign(bins, 0);
    for (std::uint64_t i = 0; i < f->n_photons; ++i) {
      const double u = rng.uniform();
      const auto it = std::upper_bound(cell_cdf_.begin(), cell_cdf_.end(), u);
      if (it != cell_cdf_.end())
        ++routed[std::size_t(it - cell_cdf_.begin())];
    }
  }

  std::array<bool, 2> armed{false, false};
  for (std::size_t b : order_) {
    const std::uint32_t photons =
        routed.empty() ? sample_poisson(rng, lambda_[b], empty_prob_[b]) : routed[b];
    bool click = photons > 0;
    if (!click && dark_[b] > 0.0)
      click = rng.uniform() < dark_[b];
    if (mechanistic_) {
      auto &arm = armed[std::size_t(weights_.detector_of_bin[b])];
      if (click && arm && p_miss_next_ > 0.0 && rng.uniform() < p_miss_next_)
        click = false;
      arm = click && photons >= 2;
    }
    sink(b, photons, click);
  }
}

ClickRecord ShotSimulator::simulate(std::uint64_t seed, std::uint64_t shot_index) const {
  ClickRecord rec;
  rec.shot_index = shot_index;
  rec.pattern.assign(weights_.bins(), false);
  run(seed, shot_index, [&](std::size_t b, std::uint32_t, bool click) {
    rec.pattern[b] = click;
    rec.n += click;
  });
  return rec;
}

ShotDetail ShotSimulator::simulate_detail(std::uint64_t seed, std::uint64_t shot_index) const {
  ShotDetail out;
  out.record.shot_index = shot_index;
  out.record.pattern.assign(weights_.bins(), false);
  out.photons.assign(weights_.bins(), 0);
  run(seed, shot_index, [&](std::size_t b, std::uint32_t photons, bool click) {
    out.record.pattern[b] = click;
    out.record.n += click;
    out.photons[b] = photons;
  });
  return out;
}

std::size_t ShotSimulator::count_clicks(std::uint64_t seed, std::uint64_t shot_index) const {
  std::size_t n = 0;
  run(seed, shot_index, [&](std::size_t, std::uint32_t, bool click) { n += click; });
  return n;
}

ClickRecord simulate_shot(const PulseSource &source, const BinWeights &weights,
                          const DetectorSpec &det, std::uint64_t seed, std::uint64_t shot_index) {
  return ShotSimulator(source, weights, det).simulate(seed, shot_index);
}

std::uint64_t BatchResult::shots() const noexcept {
  return std::accumulate(histogram.begin(), histogram.end(), std::uint64_t{0});
}

std::vector<double> BatchResult::probabilities() const {
  const double total = double(shots());
  std::vector<double> p(histogram.size(), 0.0);
  if (total > 0.0)
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] = double(histogram[i]) / total;
  return p;
}

unsigned default_thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char *env = std::getenv("BINFLUX_THREADS")) {
    char *end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1)
      n = std::min(n, unsigned(cap));
  }
  return n;
}

BatchResult simulate_batch(const PulseSource &source, const BinWeights &weights,
                           const DetectorSpec &det, std::uint64_t n_shots, std::uint64_t seed,
                           const BatchOptions &options) {
  if (n_shots < 1)
    throw InputError("simulate_batch: n_shots must be >= 1");
  const ShotSimulator sim(source, weights, det);
  const std::size_t width = sim.bins() + 1;

  unsigned threads = options.threads ? options.threads : default_thread_count();
  threads = unsigned(std::min<std::uint64_t>(threads, n_shots));

  BatchResult result;
  result.histogram.assign(width, 0);
  if (options.store_records)
    result.records.resize(n_shots);

  // Contiguous chunks; the merge is plain integer addition, so the result
  // does not depend on the partition.
  std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(width, 0));
  auto work = [&](unsigned t) {
    const std::uint64_t begin = n_shots * t / threads;
    const std::uint64_t end = n_shots * (t + 1) / threads;
    auto &hist = partial[t];
    for (std::uint64_t i = begin; i < end; ++i) {
      if (options.store_records) {
        result.records[i] = sim.simulate(seed, i);
        ++hist[result.records[i].n];
      } else {
        ++hist[sim.count_clicks(seed, i)];
      }
    }
  };

  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(work, t);
  }
  for (const auto &hist : partial)
    for (std::size_t i = 0; i < width; ++i)
      result.histogram[i] += hist[i];
  return result;
}

} // namespace binflux
