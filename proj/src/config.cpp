#include "binflux/config.hpp"

#include "binflux/errors.hpp"

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <set>

namespace binflux {

using nlohmann::json;

namespace {

void allow_only(const json &j, const std::string &where, std::initializer_list<const char *> keys) {
  if (!j.is_object())
    throw ConfigError(where + ": expected a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto &[key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError(where + "." + key + ": unknown field");
}

template <class T> T get_field(const json &j, const std::string &where, const char *key) {
  if (!j.contains(key))
    throw ConfigError(where + "." + key + ": required field missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T get_field_or(const json &j, const std::string &where, const char *key, T fallback) {
  return j.contains(key) ? get_field<T>(j, where, key) : fallback;
}

json undershoot_to_json(const UndershootModel &u) {
  if (const auto *g = std::get_if<GlobalEfficiency>(&u)) {
    json anchors = json::array();
    for (const auto &[mu, eta] : g->anchors)
      anchors.push_back({mu, eta});
    return {{"model", "global_efficiency"}, {"anchors", anchors}};
  }
  if (const auto *m = std::get_if<MechanisticUndershoot>(&u))
    return {{"model", "mechanistic"}, {"p_miss_next", m->p_miss_next}};
  return {{"model", "none"}};
}

UndershootModel undershoot_from_json(const json &j) {
  const std::string where = "detector.undershoot";
  const auto model = get_field<std::string>(j, where, "model");
  if (model == "none") {
    allow_only(j, where, {"model"});
    return NoUndershoot{};
  }
  if (model == "global_efficiency") {
    allow_only(j, where, {"model", "anchors"});
    GlobalEfficiency g;
    for (const auto &a : get_field<std::vector<std::vector<double>>>(j, where, "anchors")) {
      if (a.size() != 2)
        throw ConfigError(where + ".anchors: each anchor must be [mu, efficiency]");
      g.anchors.emplace_back(a[0], a[1]);
    }
    return g;
  }
  if (model == "mechanistic") {
    allow_only(j, where, {"model", "p_miss_next"});
    return MechanisticUndershoot{get_field<double>(j, where, "p_miss_next")};
  }
  throw ConfigError(where + ".model: unknown model '" + model +
                    "' (expected none, global_efficiency or mechanistic)");
}

} // namespace

SystemConfig preset_conventional16() {
  SystemConfig c;
  c.name = "conventional16";
  c.multiplexer = MultiplexerSpec::ideal({5e-6, 10e-6, 25e-6}, 1.44);
  c.detector.efficiency = 0.10;
  // 8e-6 per ns of gate over a 20 ns gate.
  c.detector.dark_prob_per_gate = {8e-6 * 20.0, 8e-6 * 20.0};
  c.detector.gate_width = 20e-9;
  c.detector.deadtime = 5e-6;
  c.detector.undershoot = NoUndershoot{};
  c.detector.afterpulse = AfterpulseMetadata{0.09, 20e-9};
  c.guard = c.detector.deadtime;
  return c;
}

SystemConfig preset_rapid32() {
  SystemConfig c;
  c.name = "rapid32";
  // 818 MHz / 8 = 102.25 MHz, i.e. 9.78 ns between adjacent bins.
  c.multiplexer = MultiplexerSpec::ideal({9.78e-9, 19.56e-9, 39.12e-9, 78.24e-9}, 1.35);
  c.detector.efficiency = 0.165;
  c.detector.dark_prob_per_gate = {1e-5, 5e-5};
  c.detector.gate_width = 200e-12;
  c.detector.deadtime = 9.78e-9;
  c.detector.undershoot = GlobalEfficiency{{{10.0, 0.165}, {400.0, 0.145}}};
  c.detector.afterpulse = AfterpulseMetadata{144.0 / 12806.0, 200e-12};
  c.guard = c.detector.deadtime;
  return c;
}

std::vector<std::string> preset_names() { return {"conventional16", "rapid32"}; }

SystemConfig preset(const std::string &name) {
  if (name == "conventional16")
    return preset_conventional16();
  if (name == "rapid32")
    return preset_rapid32();
  throw ConfigError("preset: unknown preset '" + name + "' (available: conventional16, rapid32)");
}

void validate(const SystemConfig &config) {
  validate(config.multiplexer);
  validate(config.detector);
  if (!(config.guard >= 0.0) || !std::isfinite(config.guard))
    throw ConfigError("multiplexer.guard_s: must be finite and >= 0");
}

json to_json(const SystemConfig &config) {
  const auto &mx = config.multiplexer;
  json transmission;
  if (const auto *u = std::get_if<UniformLoss>(&mx.transmission))
    transmission = {{"uniform_loss_db", u->avg_loss_db}};
  else
    transmission = {{"explicit", std::get<ExplicitTransmission>(mx.transmission).transmissions}};
  json assignment = "final_coupler";
  if (const auto *a = std::get_if<ExplicitAssignment>(&mx.assignment))
    assignment = a->detector_of_bin;

  const auto &det = config.detector;
  json detector = {
      {"efficiency", det.efficiency},
      {"dark_prob_per_gate", {det.dark_prob_per_gate[0], det.dark_prob_per_gate[1]}},
      {"gate_width_s", det.gate_width},
      {"deadtime_s", det.deadtime},
      {"undershoot", undershoot_to_json(det.undershoot)},
  };
  if (det.afterpulse)
    detector["afterpulse"] = {{"probability", det.afterpulse->probability},
                              {"gate_width_s", det.afterpulse->gate_width}};

  return {
      {"name", config.name},
      {"multiplexer",
       {{"loop_delays_s", mx.loop_delays},
        {"coupler_ratios", mx.coupler_ratios},
        {"transmission", transmission},
        {"detector_assignment", assignment},
        {"guard_s", config.guard}}},
      {"detector", detector},
  };
}

json to_json(const PulseSource &source) {
  if (const auto *c = std::get_if<Coherent>(&source))
    return {{"type", "coherent"}, {"mu", c->mu}};
  return {{"type", "fock"}, {"n_photons", std::get<Fock>(source).n_photons}};
}

json to_json(const RunConfig &config) {
  json j = {
      {"system", to_json(config.system)},
      {"source", to_json(config.source)},
      {"shots", config.shots},
      {"mu_max", config.mu_max},
      {"stability_tolerance", config.stability_tolerance},
  };
  j["seed"] = config.seed ? json(*config.seed) : json(nullptr);
  return j;
}

SystemConfig system_from_json(const json &j) {
  allow_only(j, "system", {"name", "multiplexer", "detector"});
  SystemConfig c;
  c.name = get_field_or<std::string>(j, "system", "name", "custom");

  if (!j.contains("multiplexer"))
    throw ConfigError("system.multiplexer: required field missing");
  const json &mj = j.at("multiplexer");
  const std::string mw = "multiplexer";
  allow_only(mj, mw,
             {"loop_delays_s", "coupler_ratios", "transmission", "detector_assignment", "guard_s"});
  auto &mx = c.multiplexer;
  mx.loop_delays = get_field<std::vector<double>>(mj, mw, "loop_delays_s");
  mx.coupler_ratios = get_field_or<std::vector<double>>(
      mj, mw, "coupler_ratios", std::vector<double>(mx.loop_delays.size() + 1, 0.5));
  if (mj.contains("transmission")) {
    const json &tj = mj.at("transmission");
    allow_only(tj, mw + ".transmission", {"uniform_loss_db", "explicit"});
    if (tj.contains("uniform_loss_db") == tj.contains("explicit"))
      throw ConfigError(mw + ".transmission: give exactly one of uniform_loss_db or explicit");
    if (tj.contains("explicit"))
      mx.transmission =
          ExplicitTransmission{get_field<std::vector<double>>(tj, mw + ".transmission", "explicit")};
    else
      mx.transmission = UniformLoss{get_field<double>(tj, mw + ".transmission", "uniform_loss_db")};
  }
  if (mj.contains("detector_assignment")) {
    const json &aj = mj.at("detector_assignment");
    if (aj.is_string()) {
      if (aj.get<std::string>() != "final_coupler")
        throw ConfigError(mw + ".detector_assignment: unknown rule '" + aj.get<std::string>() +
                          "'");
      mx.assignment = FinalCouplerAssignment{};
    } else {
      mx.assignment = ExplicitAssignment{get_field<std::vector<int>>(mj, mw, "detector_assignment")};
    }
  }

  if (!j.contains("detector"))
    throw ConfigError("system.detector: required field missing");
  const json &dj = j.at("detector");
  const std::string dw = "detector";
  allow_only(dj, dw,
             {"efficiency", "dark_prob_per_gate", "gate_width_s", "deadtime_s", "undershoot",
              "afterpulse"});
  auto &det = c.detector;
  det.efficiency = get_field<double>(dj, dw, "efficiency");
  const auto darks = get_field<std::vector<double>>(dj, dw, "dark_prob_per_gate");
  if (darks.size() != 2)
    throw ConfigError(dw + ".dark_prob_per_gate: expected one probability per APD (2)");
  det.dark_prob_per_gate = {darks[0], darks[1]};
  det.gate_width = get_field_or<double>(dj, dw, "gate_width_s", 0.0);
  det.deadtime = get_field<double>(dj, dw, "deadtime_s");
  if (dj.contains("undershoot"))
    det.undershoot = undershoot_from_json(dj.at("undershoot"));
  if (dj.contains("afterpulse")) {
    const json &aj = dj.at("afterpulse");
    allow_only(aj, dw + ".afterpulse", {"probability", "gate_width_s"});
    det.afterpulse = AfterpulseMetadata{get_field<double>(aj, dw + ".afterpulse", "probability"),
                                        get_field_or<double>(aj, dw + ".afterpulse",
                                                             "gate_width_s", 0.0)};
  }

  c.guard = get_field_or<double>(mj, mw, "guard_s", det.deadtime);
  validate(c);
  return c;
}

PulseSource source_from_json(const json &j) {
  const auto type = get_field<std::string>(j, "source", "type");
  if (type == "coherent") {
    allow_only(j, "source", {"type", "mu"});
    return Coherent{get_field<double>(j, "source", "mu")};
  }
  if (type == "fock") {
    allow_only(j, "source", {"type", "n_photons"});
    return Fock{get_field<std::uint64_t>(j, "source", "n_photons")};
  }
  throw ConfigError("source.type: unknown type '" + type + "' (expected coherent or fock)");
}

RunConfig run_from_json(const json &j) {
  allow_only(j, "config",
             {"preset", "system", "source", "seed", "shots", "mu_max", "stability_tolerance"});
  RunConfig c;
  if (j.contains("preset") == j.contains("system"))
    throw ConfigError("config: give exactly one of preset or system");
  c.system = j.contains("preset") ? preset(get_field<std::string>(j, "config", "preset"))
                                  : system_from_json(j.at("system"));
  if (j.contains("source"))
    c.source = source_from_json(j.at("source"));
  if (j.contains("seed") && !j.at("seed").is_null())
    c.seed = get_field<std::uint64_t>(j, "config", "seed");
  c.shots = get_field_or<std::uint64_t>(j, "config", "shots", c.shots);
  c.mu_max = get_field_or<int>(j, "config", "mu_max", c.mu_max);
  c.stability_tolerance =
      get_field_or<double>(j, "config", "stability_tolerance", c.stability_tolerance);
  if (c.mu_max < 1)
    throw ConfigError("config.mu_max: must be >= 1");
  if (!(c.stability_tolerance > 0.0 && c.stability_tolerance < 1.0))
    throw ConfigError("config.stability_tolerance: must lie in (0,1)");
  if (c.shots < 1)
    throw ConfigError("config.shots: must be >= 1");
  return c;
}

std::string fingerprint(const SystemConfig &config) {
  json j = to_json(config);
  j.erase("name");
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace binflux
