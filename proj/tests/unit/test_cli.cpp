#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cavlab/cli/commands.hpp"
#include "cavlab/errors.hpp"

using namespace cavlab;
using namespace cavlab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cavlab_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run_exe(const std::string& args) {
  const std::string cmd = std::string(CAVLAB_EXE) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("empty config materializes every default and round-trips") {
  const RunConfig c = parse_config(json::object());
  CHECK(c == RunConfig{});
  const json j = to_json(c);
  for (const char* key : {"physical", "potential", "gauge", "grid", "seed", "spectrum", "propagate", "sweep",
                          "classical", "compare", "husimi"})
    CHECK(j.contains(key));
  CHECK(parse_config(j) == c);
}

TEST_CASE("non-default config round-trips exactly") {
  json doc = json::parse(R"({
    "physical": {"m": 2, "omega": 1.5, "hbar": 0.5, "epsilon": 0.3},
    "potential": {"kind": "polynomial", "coefficients": [0, 0, -1, 0, 1]},
    "gauge": "AG_rescaled",
    "grid": {"mode": "manual", "matter": {"x_min": -4, "x_max": 4, "n": 64},
             "cavity": {"x_min": -5, "x_max": 5, "n": 48}},
    "seed": 12345,
    "sweep": {"task": "tunneling", "epsilon_log": {"min": 0.1, "max": 10, "count": 5}},
    "classical": {"seeds": [[0.1, 0.0], [0.2, 0.05]], "order": 6}
  })");
  const RunConfig c = parse_config(doc);
  CHECK(c.gauge == "AG_rescaled");
  CHECK(c.grid.matter->n == 64);
  CHECK(c.classical.seeds.size() == 2);
  CHECK(parse_config(to_json(c)) == c);
  CHECK(to_json(parse_config(to_json(c))).dump() == to_json(c).dump());
}

TEST_CASE("schema violations are config errors") {
  CHECK_THROWS_AS(parse_config(json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"physical", {{"m", -1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"physical", {{"m", "heavy"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"gauge", "Coulomb"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"potential", {{"kind", "morse"}, {"barrier", 1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"classical", {{"order", 3}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"grid", {{"mode", "manual"}}}}), ConfigError);
  try {
    parse_config(json{{"spectrum", {{"kk", 3}}}});
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("kk") != std::string::npos);
  }
}

TEST_CASE("set_path builds nested objects") {
  json doc = json::object();
  set_path(doc, "grid/matter/n", 32);
  set_path(doc, "seed", 7);
  CHECK(doc["grid"]["matter"]["n"] == 32);
  CHECK(doc["seed"] == 7);
}

TEST_CASE("sweep resolution order") {
  SweepSpec s;
  CHECK(s.resolved(0.4) == std::vector<double>{0.4});
  s.epsilon_log = SweepSpec::Log{0.1, 10.0, 3};
  const auto v = s.resolved(0.4);
  REQUIRE(v.size() == 3);
  CHECK(v[1] == doctest::Approx(1.0));
  s.epsilons = {2.0, 1.0};
  CHECK(s.resolved(0.4) == std::vector<double>{2.0, 1.0});
}

TEST_CASE("manifest JSON round-trip") {
  RunManifest m;
  m.version = "1.2.3";
  m.command = "spectrum";
  m.config = to_json(RunConfig{});
  m.summary = {{"x", 1}};
  m.outputs = {{"spectrum.csv", sha256_hex("x")}};
  const RunManifest b = manifest_from_json(to_json(m));
  CHECK(b.version == m.version);
  CHECK(b.outputs == m.outputs);
  CHECK(b.config == m.config);
}

TEST_CASE("commands write manifests that re-run bit-identically") {
  struct Case {
    std::string command;
    json overrides;
  };
  const std::vector<Case> cases = {
      {"spectrum", json{{"physical", {{"epsilon", 0.3}}}, {"spectrum", {{"k", 4}}}}},
      {"sweep", json{{"sweep", {{"task", "spectrum"}, {"epsilons", {0.1, 0.5, 1.0}}}},
                     {"spectrum", {{"k", 3}}},
                     {"threads", 3}}},
      {"propagate", json{{"physical", {{"epsilon", 0.2}}}, {"propagate", {{"steps", 200}, {"record_every", 20}, {"snapshot_every", 100}}}}},
      {"classical", json{{"classical", {{"crossings", 20}, {"sali_t_max", 50}, {"fraction_seeds", 6}}}}},
      {"compare",
       json{{"potential", {{"kind", "polynomial"}, {"coefficients", {0, 0, 0, 0, 1}}}},
            {"physical", {{"epsilon", 0.7}}},
            {"compare", {{"t_max", 0.5}, {"samples", 200}}}}},
      {"husimi", json{{"physical", {{"epsilon", 1.0}}}, {"husimi", {{"nx", 16}, {"np", 16}}}}},
  };
  for (const auto& c : cases) {
    CAPTURE(c.command);
    const fs::path dir = scratch(c.command);
    json doc = c.overrides;
    doc["output_dir"] = dir.string();
    std::ostringstream out;
    const RunManifest m = run_command(c.command, parse_config(doc), out);
    CHECK_FALSE(m.outputs.empty());
    CHECK(fs::exists(dir / "manifest.json"));
    const RunManifest back = read_manifest((dir / "manifest.json").string());
    CHECK(parse_config(back.config) == parse_config(m.config));
    CHECK_FALSE(back.dressed.empty());

    const fs::path again = scratch(c.command + "_again");
    const RerunReport r = rerun((dir / "manifest.json").string(), again.string(), out);
    CHECK(r.identical);
    CHECK(r.mismatched.empty());
    fs::remove_all(dir);
    fs::remove_all(again);
  }
}

TEST_CASE("params writes files only with an output directory") {
  RunConfig c;
  c.physical.epsilon = std::sqrt(0.5);
  std::ostringstream out;
  unsetenv("CAVLAB_OUTPUT_DIR");
  const RunManifest m = run_command("params", c, out);
  CHECK(m.outputs.empty());
  CHECK(out.str().find("zeta         0.5") != std::string::npos);
  CHECK(out.str().find("M            2\n") != std::string::npos);
}

TEST_CASE("gauge-check failure is a convergence error") {
  json doc{{"physical", {{"epsilon", 0.3}}},
           {"gauge_check", {{"levels", 4}, {"tolerance", 1e-30}, {"certify", false}}},
           {"output_dir", scratch("gauge_fail").string()}};
  std::ostringstream out;
  CHECK_THROWS_AS(run_command("gauge-check", parse_config(doc), out), ConvergenceError);
}

TEST_CASE("error objects and exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(ConvergenceError("x")) == 3);
  CHECK(exit_code_for(GridSupportError("x", 4.0)) == 4);
  CHECK(exit_code_for(InvalidArgument("x")) == 1);
  const json j = error_json(GridSupportError("edge", 12.5));
  CHECK(j["error"] == "grid_support");
  CHECK(j["required_extent"] == 12.5);
}

TEST_CASE("executable exit codes") {
  const std::string out = "--output-dir " + scratch("exe").string();
  CHECK(run_exe("params --m 1 --omega 1 --hbar 1 --epsilon 0.70711") == 0);
  CHECK(run_exe("spectrum --set spectrum/bogus=1 " + out) == 2);
  CHECK(run_exe("spectrum --gauge Coulomb " + out) == 2);
  CHECK(run_exe("nonsense " + out) == 2);
  CHECK(run_exe("gauge-check --epsilon 0.3 --levels 3 --set gauge_check/tolerance=1e-30 --certify false " + out) == 3);
  // Manual grid far too narrow for a packet moving outward.
  CHECK(run_exe("propagate --set grid/mode=manual --set 'grid/matter={\"x_min\":-2,\"x_max\":2,\"n\":32}' "
                "--set 'grid/cavity={\"x_min\":-6,\"x_max\":6,\"n\":32}' --x0 1 --p0 5 --steps 2000 " + out) == 4);
}
