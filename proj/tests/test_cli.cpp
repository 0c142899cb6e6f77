#include "binflux/cli.hpp"
#include "binflux/config.hpp"
#include "doctest.h"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace binflux;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string tmp(const std::string &name) {
  fs::path p = BINFLUX_TEST_TMPDIR;
  fs::create_directories(p);
  return (p / name).string();
}

std::string slurp(const std::string &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

TEST_CASE("usage errors") {
  CHECK(cli({}).code == exit_code::usage);
  CHECK(cli({"frobnicate"}).code == exit_code::usage);
  CHECK(cli({"simulate", "--mu", "3", "--shots", "10"}).code == exit_code::usage);
  CHECK(cli({"simulate", "--mu", "3", "--fock", "2", "--seed", "1"}).code == exit_code::usage);
  CHECK(cli({"--help"}).code == exit_code::ok);
}

TEST_CASE("simulate is reproducible byte for byte") {
  auto a = tmp("sim_a.csv"), b = tmp("sim_b.csv");
  auto args = [](const std::string &o) {
    return std::vector<std::string>{"simulate", "--preset", "rapid32", "--mu", "20",
                                    "--shots", "5000", "--seed", "9", "-o", o};
  };
  REQUIRE(cli(args(a)).code == 0);
  REQUIRE(cli(args(b)).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("n,count,probability", 0) == 0);
  auto manifest = json::parse(slurp(a + ".manifest.json"));
  CHECK(manifest["fingerprint"] == fingerprint(preset_rapid32()));
  CHECK(manifest.contains("version"));

  auto to_stdout = cli({"simulate", "--mu", "20", "--shots", "5000", "--seed", "9"});
  CHECK(to_stdout.code == 0);
  CHECK(to_stdout.out == slurp(a));
}

TEST_CASE("simulate with a config file") {
  RunConfig run;
  run.system = preset_conventional16();
  run.source = Fock{3};
  run.seed = 4;
  run.shots = 1000;
  auto path = tmp("run.json");
  std::ofstream(path) << to_json(run).dump(2);
  auto r = cli({"simulate", "--config", path, "-o", tmp("cfg_sim.json")});
  CHECK(r.code == 0);
  auto j = json::parse(slurp(tmp("cfg_sim.json")));
  CHECK(j.dump().find("1000") != std::string::npos);

  std::ofstream(tmp("bad.json")) << R"({"preset": "rapid32", "typo": 1})";
  CHECK(cli({"simulate", "--config", tmp("bad.json"), "--mu", "1", "--seed", "1"}).code ==
        exit_code::config);
}

TEST_CASE("matrix and infer") {
  auto m = tmp("m400.csv");
  REQUIRE(cli({"matrix", "--preset", "rapid32", "--mu-max", "400", "-o", m}).code == 0);
  auto r = cli({"infer", "-m", m, "--n", "1"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["mode"] == 8);
  CHECK(j["extent"].get<int>() == j["hi"].get<int>() - j["lo"].get<int>() + 1);
  CHECK(j["energy_J"].get<double>() == doctest::Approx(4.2e-18).epsilon(0.3));

  CHECK(cli({"infer", "-m", m, "--n", "25"}).code == exit_code::degenerate_evidence);
  CHECK(cli({"infer", "-m", m, "--n", "25", "--no-reject"}).code == 0);
  CHECK(cli({"infer", "-m", m}).code == exit_code::usage);

  std::ofstream(tmp("obs.txt")) << "5\n3\n4\n5\n";
  auto multi = cli({"infer", "-m", m, "--obs", tmp("obs.txt")});
  CHECK(multi.code == 0);
  CHECK(json::parse(multi.out)["observations"] == 4);
}

TEST_CASE("fingerprint mismatch is refused unless forced") {
  auto m = tmp("m_conv.csv");
  REQUIRE(cli({"matrix", "--preset", "conventional16", "--mu-max", "50", "-o", m}).code == 0);
  auto refused = cli({"infer", "--preset", "rapid32", "-m", m, "--n", "2"});
  CHECK(refused.code == exit_code::config);
  CHECK(cli({"infer", "--preset", "rapid32", "-m", m, "--n", "2", "--force", "--no-reject"}).code == 0);
  CHECK(cli({"infer", "--preset", "conventional16", "-m", m, "--n", "2"}).code ==
        exit_code::degenerate_evidence);
  CHECK(cli({"infer", "--preset", "conventional16", "-m", m, "--n", "2", "--no-reject"}).code ==
        0);
}

TEST_CASE("mechanistic undershoot has no exact matrix") {
  auto r = cli({"matrix", "--undershoot", "mechanistic", "--p-miss-next", "0.2", "--mu-max",
                "10", "-o", tmp("mech.csv")});
  CHECK(r.code == exit_code::model_unsupported);
  auto mc = cli({"matrix", "--undershoot", "mechanistic", "--p-miss-next", "0.2", "--mu-max",
                 "5", "--method", "mc", "--shots", "1000", "--seed", "3", "-o",
                 tmp("mech_mc.csv")});
  CHECK(mc.code == 0);
}

TEST_CASE("corrupt matrix file") {
  std::ofstream(tmp("corrupt.csv")) << "# binflux-matrix v1, fingerprint=00, mu_max=3\n0,1\n";
  CHECK(cli({"infer", "-m", tmp("corrupt.csv"), "--n", "0"}).code == exit_code::failure);
}

TEST_CASE("compare and sweeps") {
  auto r = cli({"compare", "--mu", "100", "--max-shots", "60", "--trials", "4", "--seed", "2",
                "-o", tmp("cmp.csv")});
  REQUIRE(r.code == 0);
  CHECK(slurp(tmp("cmp.csv")).rfind("shots,rel_err_multiplexed,rel_err_single_pixel", 0) == 0);
  CHECK(cli({"compare", "--mu", "3", "--max-shots", "5", "--trials", "2", "--seed", "2"}).code ==
        exit_code::usage);

  auto traj = cli({"sweep", "trajectory", "--obs", "5,3,4,5"});
  REQUIRE(traj.code == 0);
  CHECK(traj.out.rfind("k,n,mode,lo,hi,mass", 0) == 0);
  CHECK(cli({"sweep", "posteriors", "--mu-max", "100", "--n-max", "3"}).code == 0);
  CHECK(cli({"sweep", "matrix", "--mu-max", "10"}).code == 0);
}

TEST_CASE("presets listing") {
  auto r = cli({"presets", "rapid32"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find(fingerprint(preset_rapid32())) != std::string::npos);
  CHECK(cli({"presets", "nope"}).code == exit_code::config);
}
