#include "binflux/cli.hpp"

#include "binflux/baseline.hpp"
#include "binflux/config.hpp"
#include "binflux/errors.hpp"
#include "binflux/exact_oracle.hpp"
#include "binflux/inference.hpp"
#include "binflux/mc_engine.hpp"
#include "binflux/response_matrix.hpp"
#include "binflux/rng.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef BINFLUX_VERSION
#define BINFLUX_VERSION "dev"
#endif

namespace binflux {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
public:
  using Error::Error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out)
    throw Error("failed writing '" + path.string() + "'");
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Physical-configuration flags shared by every subcommand.
struct SystemOptions {
  std::string preset;
  std::string config_path;
  std::optional<double> eta;
  std::optional<double> loss_db;
  std::optional<double> guard;
  std::vector<double> darks;
  std::optional<std::string> undershoot;
  std::optional<double> p_miss_next;

  bool explicitly_given() const {
    return !preset.empty() || !config_path.empty() || eta || loss_db || guard ||
           !darks.empty() || undershoot || p_miss_next;
  }
};

void add_system_options(CLI::App *app, SystemOptions &o) {
  auto *p = app->add_option("--preset", o.preset, "Built-in configuration (conventional16, rapid32)");
  auto *c = app->add_option("--config", o.config_path, "JSON run configuration file");
  p->excludes(c);
  app->add_option("--eta", o.eta, "Override the detection efficiency");
  app->add_option("--loss-db", o.loss_db, "Override the bin-averaged multiplexer loss (dB)");
  app->add_option("--guard", o.guard, "Override the guard interval after the last bin (s)");
  app->add_option("--darks", o.darks, "Override the dark-count probability per gate of both APDs")
      ->expected(2);
  app->add_option("--undershoot", o.undershoot, "Undershoot model")
      ->check(CLI::IsMember({"none", "global", "mechanistic"}));
  app->add_option("--p-miss-next", o.p_miss_next,
                  "Suppression probability for the mechanistic undershoot model");
}

RunConfig resolve(const SystemOptions &o) {
  RunConfig rc;
  if (!o.config_path.empty()) {
    json j;
    try {
      j = json::parse(read_file(o.config_path));
    } catch (const json::exception &e) {
      throw ConfigError(o.config_path + ": " + e.what());
    }
    rc = run_from_json(j);
  } else {
    rc.system = preset(o.preset.empty() ? "rapid32" : o.preset);
  }
  auto &sys = rc.system;
  if (o.eta)
    sys.detector.efficiency = *o.eta;
  if (o.loss_db)
    sys.multiplexer.transmission = UniformLoss{*o.loss_db};
  if (o.guard)
    sys.guard = *o.guard;
  if (!o.darks.empty())
    sys.detector.dark_prob_per_gate = {o.darks[0], o.darks[1]};
  if (o.undershoot) {
    if (*o.undershoot == "none")
      sys.detector.undershoot = NoUndershoot{};
    else if (*o.undershoot == "mechanistic")
      sys.detector.undershoot = MechanisticUndershoot{o.p_miss_next.value_or(0.0)};
    else if (!std::holds_alternative<GlobalEfficiency>(sys.detector.undershoot))
      throw UsageError("--undershoot global needs anchors; give them in a --config file");
  } else if (o.p_miss_next) {
    auto *mech = std::get_if<MechanisticUndershoot>(&sys.detector.undershoot);
    if (!mech)
      throw UsageError("--p-miss-next requires --undershoot mechanistic");
    mech->p_miss_next = *o.p_miss_next;
  }
  if (o.explicitly_given() && (o.eta || o.loss_db || o.guard || !o.darks.empty() || o.undershoot))
    sys.name += "+overrides";
  validate(sys);
  return rc;
}

std::uint64_t require_seed(const std::optional<std::uint64_t> &flag, const RunConfig &rc) {
  if (flag)
    return *flag;
  if (rc.seed)
    return *rc.seed;
  throw UsageError("--seed is required for Monte Carlo runs (there is no clock-based default)");
}

std::vector<std::string> g_args; // command line of the current invocation

void write_manifest(const fs::path &output, const std::string &command, const RunConfig &rc,
                    const json &extra) {
  json m = {
      {"tool", "binflux"},
      {"version", BINFLUX_VERSION},
      {"command", command},
      {"args", g_args},
      {"config", to_json(rc)},
      {"fingerprint", fingerprint(rc.system)},
      {"output", output.filename().string()},
  };
  for (const auto &[k, v] : extra.items())
    m[k] = v;
  write_file(fs::path(output.string() + ".manifest.json"), m.dump(2) + "\n");
}

// Emits `content` to the file (plus manifest) or to stdout.
void emit(const std::string &path, const std::string &content, std::ostream &out,
          const std::string &command, const RunConfig &rc, const json &extra = json::object()) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  write_file(path, content);
  write_manifest(path, command, rc, extra);
}

std::optional<std::size_t> determine_cutoff(const RunConfig &rc, int mu_max, bool no_reject,
                                            const std::optional<std::size_t> &max_n) {
  if (no_reject)
    return std::nullopt;
  if (max_n)
    return max_n;
  return stability_max_n(rc.system, mu_max, rc.stability_tolerance);
}

std::vector<std::size_t> read_observations(const fs::path &path) {
  std::istringstream in(read_file(path));
  std::vector<std::size_t> obs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#')
      continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(b, e - b + 1);
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &pos);
    } catch (const std::exception &) {
      pos = 0;
    }
    if (pos != tok.size() || tok.empty() || tok[0] == '-')
      throw ParseError(path.string() + ": expected one non-negative click count per line", line_no);
    obs.push_back(std::size_t(v));
  }
  if (obs.empty())
    throw InputError(path.string() + ": no observations");
  return obs;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  SystemOptions sys;
  std::optional<double> mu;
  std::optional<std::uint64_t> fock;
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format;
  std::string records;
};

void run_simulate(const SimulateOptions &o, std::ostream &out) {
  RunConfig rc = resolve(o.sys);
  if (o.mu)
    rc.source = Coherent{*o.mu};
  else if (o.fock)
    rc.source = Fock{*o.fock};
  else if (o.sys.config_path.empty())
    throw UsageError("simulate: give --mu or --fock (or a --config with a source)");
  if (o.shots)
    rc.shots = *o.shots;
  const std::uint64_t seed = require_seed(o.seed, rc);
  rc.seed = seed;

  const auto weights = rc.system.weights();
  const auto batch = simulate_batch(rc.source, weights, rc.system.detector, rc.shots, seed,
                                    {.store_records = !o.records.empty()});
  const auto probs = batch.probabilities();

  std::string format = o.format;
  if (format.empty())
    format = fs::path(o.output).extension() == ".json" ? "json" : "csv";

  std::string content;
  if (format == "json") {
    json j = {{"fingerprint", fingerprint(rc.system)},
              {"source", to_json(rc.source)},
              {"shots", rc.shots},
              {"seed", seed},
              {"count", batch.histogram},
              {"probability", probs}};
    content = j.dump(1) + "\n";
  } else {
    std::ostringstream s;
    s << "n,count,probability\n";
    for (std::size_t n = 0; n < batch.histogram.size(); ++n)
      s << n << ',' << batch.histogram[n] << ',' << fmt(probs[n]) << '\n';
    content = s.str();
  }
  emit(o.output, content, out, "simulate", rc);

  if (!o.records.empty()) {
    std::ostringstream s;
    s << "shot_index,n,pattern\n";
    for (const auto &r : batch.records) {
      s << r.shot_index << ',' << r.n << ',';
      for (bool b : r.pattern)
        s << (b ? '1' : '0');
      s << '\n';
    }
    write_file(o.records, s.str());
  }
}

// ------------------------------------------------------------------ matrix

struct MatrixOptions {
  SystemOptions sys;
  std::optional<int> mu_max;
  std::string method = "exact";
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
  std::vector<int> support;
  std::vector<double> check_interp;
  std::string output;
};

void run_matrix(const MatrixOptions &o, std::ostream &out) {
  RunConfig rc = resolve(o.sys);
  if (o.mu_max)
    rc.mu_max = *o.mu_max;
  BuildMethod method = ExactMethod{};
  if (o.method == "mc") {
    const auto seed = require_seed(o.seed, rc);
    rc.seed = seed;
    if (o.shots)
      rc.shots = *o.shots;
    method = MonteCarloMethod{rc.shots, seed};
  }
  const auto m = build_matrix(rc.system, rc.mu_max, method, o.support);
  save_matrix(m, o.output);
  write_manifest(o.output, "matrix", rc, {{"method", m.method_string()}});

  json summary = {{"output", o.output},
                  {"fingerprint", m.fingerprint},
                  {"mu_max", m.mu_max},
                  {"bins", m.bins},
                  {"method", m.method_string()}};
  if (!o.check_interp.empty()) {
    json errs = json::array();
    for (double mu : o.check_interp)
      errs.push_back({{"mu", mu}, {"total_variation", interpolation_error(m, rc.system, mu)}});
    summary["interpolation_error"] = errs;
  }
  out << summary.dump(2) << '\n';
}

// ------------------------------------------------------------------- infer

struct InferOptions {
  SystemOptions sys;
  std::string matrix;
  std::optional<std::size_t> n;
  std::string obs;
  double level = 0.90;
  double wavelength = kTelecomWavelength;
  std::optional<double> tolerance;
  std::optional<std::size_t> max_n;
  bool no_reject = false;
  bool force = false;
  std::string posterior;
  std::string output;
};

void run_infer(const InferOptions &o, std::ostream &out, std::ostream &err) {
  const auto m = load_matrix(o.matrix);

  std::optional<RunConfig> rc;
  if (o.sys.explicitly_given()) {
    rc = resolve(o.sys);
    if (!fingerprint_matches(m, rc->system)) {
      if (!o.force)
        throw ConfigError("matrix fingerprint " + m.fingerprint +
                          " does not match the supplied configuration (" +
                          fingerprint(rc->system) + "); rebuild the matrix or pass --force");
      err << "warning: matrix fingerprint " << m.fingerprint
          << " does not match the supplied configuration\n";
    }
  } else {
    for (const auto &name : preset_names()) {
      auto sys = preset(name);
      if (fingerprint_matches(m, sys)) {
        rc = RunConfig{};
        rc->system = std::move(sys);
        break;
      }
    }
  }
  if (rc && o.tolerance)
    rc->stability_tolerance = *o.tolerance;

  std::optional<std::size_t> cutoff;
  if (!o.no_reject) {
    if (o.max_n)
      cutoff = o.max_n;
    else if (rc)
      cutoff = determine_cutoff(*rc, m.mu_max, false, std::nullopt);
    else
      throw ConfigError("cannot determine the stability cutoff for this matrix: pass the "
                        "configuration it was built from (--preset/--config), --max-n or "
                        "--no-reject");
    if (!cutoff)
      throw DegenerateEvidenceError("no click count is stable at mu_max=" +
                                    std::to_string(m.mu_max));
  }

  if (!o.n && o.obs.empty())
    throw UsageError("infer: give --n or --obs");
  std::vector<std::size_t> observations;
  if (o.n)
    observations.push_back(*o.n);
  else
    observations = read_observations(o.obs);

  const auto post = posterior_multi(m, observations, cutoff);
  const auto ci = credible_interval(post, o.level);
  json result = {
      {"mode", ci.mode},
      {"lo", ci.lo},
      {"hi", ci.hi},
      {"mass", ci.mass},
      {"level", ci.level},
      {"extent", ci.extent()},
      {"energy_J", interval_to_energy(ci.extent(), o.wavelength)},
      {"wavelength_m", o.wavelength},
      {"observations", observations.size()},
      {"mu_max", m.mu_max},
      {"fingerprint", m.fingerprint},
  };
  result["max_admissible_n"] = cutoff ? json(*cutoff) : json(nullptr);

  RunConfig manifest_cfg = rc.value_or(RunConfig{});
  if (!o.posterior.empty()) {
    std::ostringstream s;
    s << "mu,probability\n";
    for (std::size_t mu = 0; mu < post.probs.size(); ++mu)
      s << mu << ',' << fmt(post.probs[mu]) << '\n';
    write_file(o.posterior, s.str());
  }
  emit(o.output, result.dump(2) + "\n", out, "infer", manifest_cfg);
}

// ----------------------------------------------------------------- compare

struct CompareOptions {
  SystemOptions sys;
  std::optional<double> mu;
  std::size_t max_shots = 500;
  std::size_t trials = 100;
  std::optional<std::uint64_t> seed;
  double target = 0.1;
  std::string convention = "full";
  std::string matrix;
  std::optional<std::size_t> max_n;
  bool no_reject = false;
  std::string output;
};

WidthConvention parse_convention(const std::string &s) {
  return s == "half" ? WidthConvention::HalfWidth : WidthConvention::FullWidth;
}

ResponseMatrix matrix_for(const RunConfig &rc, const std::string &path) {
  if (path.empty())
    return build_matrix(rc.system, rc.mu_max);
  auto m = load_matrix(path);
  if (!fingerprint_matches(m, rc.system))
    throw ConfigError("matrix " + path + " was built for a different configuration");
  return m;
}

void run_compare(const CompareOptions &o, std::ostream &out) {
  RunConfig rc = resolve(o.sys);
  const double mu = o.mu ? *o.mu : source_intensity(rc.source);
  if (!(mu > 0.0))
    throw UsageError("compare: give --mu");
  rc.source = Coherent{mu};
  const auto seed = require_seed(o.seed, rc);
  rc.seed = seed;

  const auto m = matrix_for(rc, o.matrix);
  const auto cutoff = determine_cutoff(rc, m.mu_max, o.no_reject, o.max_n);
  const auto curve = relative_error_curve(rc.system, m, mu, o.max_shots, o.trials, seed, cutoff);

  const auto spec = matched_spec(mu, rc.system.detector.efficiency);
  const auto convention = parse_convention(o.convention);
  const auto baseline = baseline_error_curve(mu, spec, o.max_shots, convention);

  std::ostringstream s;
  s << "shots,rel_err_multiplexed,rel_err_single_pixel\n";
  for (std::size_t k = 0; k < o.max_shots; ++k)
    s << (k + 1) << ',' << fmt(curve.median[k]) << ',' << fmt(baseline[k]) << '\n';

  const double p = detection_probability(mu, spec);
  const double mux = median_shots_to_reach(curve, o.target);
  const double half = baseline_shots_for(o.target, p, WidthConvention::HalfWidth);
  const double full = baseline_shots_for(o.target, p, WidthConvention::FullWidth);
  json summary = {{"mu", mu},
                  {"target_relative_error", o.target},
                  {"multiplexed_median_shots", mux},
                  {"multiplexed_reached_within_max_shots", mux <= double(o.max_shots)},
                  {"baseline_shots_half_width", half},
                  {"baseline_shots_full_width", full},
                  {"ratio_half_width", half / mux},
                  {"ratio_full_width", full / mux},
                  {"rejected_shots", curve.rejected_shots}};
  summary["max_admissible_n"] = cutoff ? json(*cutoff) : json(nullptr);

  if (o.output.empty() || o.output == "-") {
    out << s.str();
  } else {
    write_file(o.output, s.str());
    write_manifest(o.output, "compare", rc, {{"summary", summary}});
    out << summary.dump(2) << '\n';
  }
}

// ------------------------------------------------------------------- sweep

struct SweepOptions {
  SystemOptions sys;
  std::string kind;
  std::optional<int> mu_max;
  std::size_t n_max = 15;
  std::vector<std::size_t> obs;
  std::vector<double> mus{10, 50, 100};
  std::size_t max_shots = 500;
  std::size_t trials = 100;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_n;
  bool no_reject = false;
  std::string output;
};

void run_sweep(const SweepOptions &o, std::ostream &out) {
  RunConfig rc = resolve(o.sys);
  std::ostringstream s;
  json extra = {{"kind", o.kind}};

  if (o.kind == "matrix") {
    const int mu_max = o.mu_max.value_or(150);
    const auto m = build_matrix(rc.system, mu_max);
    s << "mu,n,probability\n";
    for (int mu = 0; mu <= mu_max; ++mu)
      for (std::size_t n = 0; n <= m.bins; ++n)
        s << mu << ',' << n << ',' << fmt(m.at(mu, n)) << '\n';
  } else if (o.kind == "posteriors") {
    if (o.mu_max)
      rc.mu_max = *o.mu_max;
    const auto m = build_matrix(rc.system, rc.mu_max);
    s << "mu,n,probability\n";
    for (std::size_t n = 1; n <= std::min(o.n_max, m.bins); ++n) {
      const auto post = posterior_single(m, n);
      for (std::size_t mu = 0; mu < post.probs.size(); ++mu)
        s << mu << ',' << n << ',' << fmt(post.probs[mu]) << '\n';
    }
  } else if (o.kind == "trajectory") {
    if (o.obs.empty())
      throw UsageError("sweep trajectory: give --obs");
    if (o.mu_max)
      rc.mu_max = *o.mu_max;
    const auto m = build_matrix(rc.system, rc.mu_max);
    const auto cutoff = determine_cutoff(rc, rc.mu_max, o.no_reject, o.max_n);
    s << "k,n,mode,lo,hi,mass\n";
    for (std::size_t k = 1; k <= o.obs.size(); ++k) {
      const auto post =
          posterior_multi(m, std::span<const std::size_t>(o.obs.data(), k), cutoff);
      const auto ci = credible_interval(post);
      s << k << ',' << o.obs[k - 1] << ',' << ci.mode << ',' << ci.lo << ',' << ci.hi << ','
        << fmt(ci.mass) << '\n';
    }
  } else if (o.kind == "relerr") {
    if (o.mu_max)
      rc.mu_max = *o.mu_max;
    const auto seed = require_seed(o.seed, rc);
    rc.seed = seed;
    const auto m = build_matrix(rc.system, rc.mu_max);
    const auto cutoff = determine_cutoff(rc, rc.mu_max, o.no_reject, o.max_n);
    std::vector<std::vector<double>> medians;
    json reached = json::object();
    for (std::size_t i = 0; i < o.mus.size(); ++i) {
      const auto curve = relative_error_curve(rc.system, m, o.mus[i], o.max_shots, o.trials,
                                              derive_key(seed, i), cutoff);
      medians.push_back(curve.median);
      reached[fmt(o.mus[i])] = median_shots_to_reach(curve, 0.1);
    }
    // The matched single-pixel curve is the same for every mu > 4.
    const auto baseline =
        baseline_error_curve(100.0, matched_spec(100.0, rc.system.detector.efficiency),
                             o.max_shots, WidthConvention::FullWidth);
    s << "shots";
    for (double mu : o.mus)
      s << ",mu_" << fmt(mu);
    s << ",single_pixel\n";
    for (std::size_t k = 0; k < o.max_shots; ++k) {
      s << (k + 1);
      for (const auto &med : medians)
        s << ',' << fmt(med[k]);
      s << ',' << fmt(baseline[k]) << '\n';
    }
    extra["median_shots_to_0.1"] = reached;
  } else {
    throw UsageError("sweep: unknown kind '" + o.kind + "'");
  }
  emit(o.output, s.str(), out, "sweep", rc, extra);
}

// ----------------------------------------------------------------- presets

void run_presets(const std::string &name, std::ostream &out) {
  json all = json::object();
  for (const auto &n : preset_names()) {
    if (!name.empty() && n != name)
      continue;
    const auto sys = preset(n);
    const auto weights = sys.weights();
    const auto timing = sys.timing();
    json j = to_json(sys);
    j["fingerprint"] = fingerprint(sys);
    j["bins"] = weights.bins();
    j["timing"] = {{"min_spacing_s", timing.min_spacing},
                   {"train_length_s", timing.train_length},
                   {"max_rep_rate_hz", timing.max_rep_rate},
                   {"deadtime_violation", timing.deadtime_violation}};
    j["shot_dark_probability"] = shot_dark_probability(sys.detector, weights.bins() / 2);
    all[n] = j;
  }
  if (all.empty())
    throw ConfigError("preset: unknown preset '" + name + "'");
  out << all.dump(2) << '\n';
}

int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const UsageError *>(&e) || dynamic_cast<const InputError *>(&e))
    return exit_code::usage;
  if (dynamic_cast<const ConfigError *>(&e))
    return exit_code::config;
  if (dynamic_cast<const UnsupportedModelError *>(&e))
    return exit_code::model_unsupported;
  if (dynamic_cast<const DegenerateEvidenceError *>(&e) ||
      dynamic_cast<const RejectedObservationError *>(&e))
    return exit_code::degenerate_evidence;
  return exit_code::failure;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"binflux: time-multiplexed photon-number-resolving detector toolkit", "binflux"};
  app.set_version_flag("--version", BINFLUX_VERSION);
  app.require_subcommand(1);

  SimulateOptions sim;
  auto *c_sim = app.add_subcommand("simulate", "Monte Carlo click-count histogram");
  add_system_options(c_sim, sim.sys);
  auto *o_mu = c_sim->add_option("--mu", sim.mu, "Coherent pulse mean photon number");
  auto *o_fock = c_sim->add_option("--fock", sim.fock, "Fock state photon number");
  o_mu->excludes(o_fock);
  c_sim->add_option("--shots", sim.shots, "Number of shots (default 1000000)");
  c_sim->add_option("--seed", sim.seed, "Master seed (required)");
  c_sim->add_option("-o,--output", sim.output, "Output file (stdout if omitted)");
  c_sim->add_option("--format", sim.format, "csv or json (default from extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  c_sim->add_option("--records", sim.records, "Also write every shot's click pattern here");

  MatrixOptions mat;
  auto *c_mat = app.add_subcommand("matrix", "Build the response matrix p(n|mu)");
  add_system_options(c_mat, mat.sys);
  c_mat->add_option("--mu-max", mat.mu_max, "Largest mu row (default 400)");
  c_mat->add_option("--method", mat.method, "exact or mc")
      ->check(CLI::IsMember({"exact", "mc"}));
  c_mat->add_option("--shots", mat.shots, "Shots per row for --method mc");
  c_mat->add_option("--seed", mat.seed, "Seed for --method mc");
  c_mat->add_option("--support", mat.support,
                    "Compute only these mu rows and interpolate the rest")
      ->delimiter(',');
  c_mat->add_option("--check-interp", mat.check_interp,
                    "Report the interpolation error against the exact law at these mu")
      ->delimiter(',');
  c_mat->add_option("-o,--output", mat.output, "Matrix file (.csv or .json)")->required();

  InferOptions inf;
  auto *c_inf = app.add_subcommand("infer", "Posterior over mu from click counts");
  add_system_options(c_inf, inf.sys);
  c_inf->add_option("-m,--matrix", inf.matrix, "Response matrix file")->required();
  auto *o_n = c_inf->add_option("--n", inf.n, "Single-shot click count");
  auto *o_obs = c_inf->add_option("--obs", inf.obs, "File with one click count per line");
  o_n->excludes(o_obs);
  c_inf->add_option("--level", inf.level, "Credible level (default 0.90)");
  c_inf->add_option("--wavelength", inf.wavelength, "Wavelength in meters (default 1550e-9)");
  c_inf->add_option("--tolerance", inf.tolerance, "Stability TV tolerance (default 0.01)");
  c_inf->add_option("--max-n", inf.max_n, "Explicit stability cutoff");
  c_inf->add_flag("--no-reject", inf.no_reject, "Do not apply the stability cutoff");
  c_inf->add_flag("--force", inf.force, "Accept a matrix built for another configuration");
  c_inf->add_option("--posterior", inf.posterior, "Write the posterior as CSV mu,probability");
  c_inf->add_option("-o,--output", inf.output, "Result JSON file (stdout if omitted)");

  CompareOptions cmp;
  auto *c_cmp = app.add_subcommand("compare", "Multiplexed vs single-pixel relative error");
  add_system_options(c_cmp, cmp.sys);
  c_cmp->add_option("--mu", cmp.mu, "True mean photon number")->required();
  c_cmp->add_option("--max-shots", cmp.max_shots, "Shots per trial (default 500)");
  c_cmp->add_option("--trials", cmp.trials, "Independent trials (default 100)");
  c_cmp->add_option("--seed", cmp.seed, "Master seed (required)");
  c_cmp->add_option("--target", cmp.target, "Relative error threshold (default 0.1)");
  c_cmp->add_option("--baseline-convention", cmp.convention,
                    "Single-pixel width: full (2 z sigma, default) or half (z sigma)")
      ->check(CLI::IsMember({"full", "half"}));
  c_cmp->add_option("-m,--matrix", cmp.matrix, "Use this matrix instead of the exact one");
  c_cmp->add_option("--max-n", cmp.max_n, "Explicit stability cutoff");
  c_cmp->add_flag("--no-reject", cmp.no_reject, "Do not apply the stability cutoff");
  c_cmp->add_option("-o,--output", cmp.output, "Curve CSV (stdout if omitted)");

  SweepOptions swp;
  auto *c_swp = app.add_subcommand("sweep", "Grids over mu or shot counts for plotting");
  add_system_options(c_swp, swp.sys);
  c_swp->add_option("kind", swp.kind, "matrix | posteriors | trajectory | relerr")
      ->required()
      ->check(CLI::IsMember({"matrix", "posteriors", "trajectory", "relerr"}));
  c_swp->add_option("--mu-max", swp.mu_max, "Largest mu row");
  c_swp->add_option("--n-max", swp.n_max, "Largest n for posteriors (default 15)");
  c_swp->add_option("--obs", swp.obs, "Observation series for trajectory")->delimiter(',');
  c_swp->add_option("--mus", swp.mus, "True mu values for relerr")->delimiter(',');
  c_swp->add_option("--max-shots", swp.max_shots, "Shots per trial for relerr");
  c_swp->add_option("--trials", swp.trials, "Trials for relerr");
  c_swp->add_option("--seed", swp.seed, "Master seed for relerr");
  c_swp->add_option("--max-n", swp.max_n, "Explicit stability cutoff");
  c_swp->add_flag("--no-reject", swp.no_reject, "Do not apply the stability cutoff");
  c_swp->add_option("-o,--output", swp.output, "Output CSV (stdout if omitted)");

  std::string preset_name;
  auto *c_pre = app.add_subcommand("presets", "Print the built-in configurations");
  c_pre->add_option("name", preset_name, "Only this preset");

  g_args.assign(argv + 1, argv + argc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  try {
    if (*c_sim)
      run_simulate(sim, out);
    else if (*c_mat)
      run_matrix(mat, out);
    else if (*c_inf)
      run_infer(inf, out, err);
    else if (*c_cmp)
      run_compare(cmp, out);
    else if (*c_swp)
      run_sweep(swp, out);
    else if (*c_pre)
      run_presets(preset_name, out);
  } catch (const std::exception &e) {
    err << "binflux: error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return exit_code::ok;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  std::vector<const char *> argv{"binflux"};
  for (const auto &a : args)
    argv.push_back(a.c_str());
  return run_cli(int(argv.size()), argv.data(), out, err);
}

} // namespace binflux
