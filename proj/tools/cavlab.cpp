#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cavlab/cli/commands.hpp"
#include "cavlab/errors.hpp"

using cavlab::cli::json;

namespace {

// Parses "a=b" where b is JSON, falling back to a plain string.
std::pair<std::string, json> parse_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw cavlab::ConfigError("--set expects path=value, got \"" + s + "\"");
  const std::string value = s.substr(eq + 1);
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = value;
  return {s.substr(0, eq), v};
}

json parse_epsilon_log(const std::string& s) {
  double lo = 0, hi = 0;
  long long count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || !is.eof())
    throw cavlab::ConfigError("--epsilon-log expects min:max:count, got \"" + s + "\"");
  return json{{"min", lo}, {"max", hi}, {"count", count}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-mode cavity light-matter model: spectra, dynamics and classical chaos"};
  app.set_version_flag("--version", std::string(cavlab::cli::artifact_version()));

  std::string command;
  std::vector<std::string> rest;
  std::string config_path;
  std::optional<double> m, omega, hbar, epsilon;
  std::optional<std::string> gauge, potential, output_dir, task, epsilon_log, method, system;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads, k, steps, levels, crossings, fraction_seeds, samples;
  std::optional<double> dt, energy, x0, p0, sigma, t_max, lambda;
  std::optional<bool> certify;
  std::vector<double> epsilons;
  std::vector<std::string> sets;

  std::string names;
  for (const auto& n : cavlab::cli::command_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("command", command, "One of: " + names + ", rerun")->required();
  app.add_option("args", rest, "rerun: path to manifest.json");
  app.add_option("-c,--config", config_path, "JSON run configuration");
  app.add_option("--m", m, "Matter mass");
  app.add_option("--omega", omega, "Cavity frequency");
  app.add_option("--hbar", hbar, "Planck constant");
  app.add_option("--epsilon", epsilon, "Momentum-gauge coupling");
  app.add_option("--gauge", gauge, "MG, AG, AG_rescaled, MG_weak, AG_weak or semiclassical");
  app.add_option("--potential", potential, "Potential kind, or a JSON object");
  app.add_option("--seed", seed, "64-bit seed for every random choice");
  app.add_option("--threads", threads, "Worker threads (0: available parallelism)");
  app.add_option("-o,--output-dir", output_dir, "Output directory (default $CAVLAB_OUTPUT_DIR or ./cavlab_out)");
  app.add_option("--k", k, "spectrum: number of eigenvalues");
  app.add_option("--method", method, "spectrum: auto, dense or krylov");
  app.add_option("--levels", levels, "gauge-check: levels compared");
  app.add_option("--certify", certify, "spectrum / gauge-check: re-solve on a refined grid");
  app.add_option("--task", task, "sweep: params, spectrum or tunneling");
  app.add_option("--epsilons", epsilons, "sweep: explicit coupling list")->delimiter(',');
  app.add_option("--epsilon-log", epsilon_log, "sweep: min:max:count log-spaced couplings");
  app.add_option("--dt", dt, "propagate / classical / compare: time step");
  app.add_option("--steps", steps, "propagate: number of steps");
  app.add_option("--x0", x0, "propagate / compare / husimi: packet centre");
  app.add_option("--p0", p0, "propagate / compare / husimi: packet momentum");
  app.add_option("--sigma", sigma, "packet width (0: local harmonic width)");
  app.add_option("--t-max", t_max, "compare: final time");
  app.add_option("--samples", samples, "compare: classical ensemble size");
  app.add_option("--system", system, "classical: henon_heiles or harmonic_2d");
  app.add_option("--lambda", lambda, "classical: Henon-Heiles coupling");
  app.add_option("--energy", energy, "classical: energy shell");
  app.add_option("--crossings", crossings, "classical: section crossings per seed");
  app.add_option("--fraction-seeds", fraction_seeds, "classical: random seeds for the chaotic fraction");
  app.add_option("--set", sets, "Override any config value: path=json, e.g. grid/levels=30");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return 0;
    std::cerr << json{{"error", "config"}, {"message", e.what()}, {"exit_code", 2}}.dump() << "\n";
    return 2;
  }

  try {
    if (command == "rerun") {
      if (rest.size() != 1) throw cavlab::ConfigError("rerun expects exactly one manifest path");
      const auto r = cavlab::cli::rerun(rest[0], output_dir.value_or(""), std::cout);
      return r.identical ? 0 : 3;
    }
    if (!rest.empty()) throw cavlab::ConfigError("unexpected argument \"" + rest[0] + "\"");

    json doc = json::object();
    if (!config_path.empty()) doc = cavlab::cli::to_json(cavlab::cli::load_config_file(config_path));
    using cavlab::cli::set_path;
    if (m) set_path(doc, "physical/m", *m);
    if (omega) set_path(doc, "physical/omega", *omega);
    if (hbar) set_path(doc, "physical/hbar", *hbar);
    if (epsilon) set_path(doc, "physical/epsilon", *epsilon);
    if (gauge) set_path(doc, "gauge", *gauge);
    if (potential) {
      json p = json::parse(*potential, nullptr, false);
      set_path(doc, "potential", p.is_object() ? p : json{{"kind", *potential}});
    }
    if (seed) set_path(doc, "seed", *seed);
    if (threads) set_path(doc, "threads", *threads);
    if (output_dir) set_path(doc, "output_dir", *output_dir);
    if (k) set_path(doc, "spectrum/k", *k);
    if (method) set_path(doc, "spectrum/method", *method);
    if (levels) set_path(doc, "gauge_check/levels", *levels);
    if (certify) {
      set_path(doc, "spectrum/certify", *certify);
      set_path(doc, "gauge_check/certify", *certify);
    }
    if (task) set_path(doc, "sweep/task", *task);
    if (!epsilons.empty()) set_path(doc, "sweep/epsilons", epsilons);
    if (epsilon_log) set_path(doc, "sweep/epsilon_log", parse_epsilon_log(*epsilon_log));
    if (dt) {
      const char* block = command == "classical" ? "classical/dt" : command == "compare" ? "compare/dt" : "propagate/dt";
      set_path(doc, block, *dt);
    }
    if (steps) set_path(doc, "propagate/steps", *steps);
    for (const char* block : {"propagate", "compare", "husimi"}) {
      if (x0) set_path(doc, std::string(block) + "/x0", *x0);
      if (p0) set_path(doc, std::string(block) + "/p0", *p0);
      if (sigma) set_path(doc, std::string(block) + "/sigma", *sigma);
    }
    if (t_max) set_path(doc, "compare/t_max", *t_max);
    if (samples) set_path(doc, "compare/samples", *samples);
    if (system) set_path(doc, "classical/system", *system);
    if (lambda) set_path(doc, "classical/lambda", *lambda);
    if (energy) set_path(doc, "classical/energy", *energy);
    if (crossings) set_path(doc, "classical/crossings", *crossings);
    if (fraction_seeds) set_path(doc, "classical/fraction_seeds", *fraction_seeds);
    for (const auto& s : sets) {
      auto [path, value] = parse_assignment(s);
      set_path(doc, path, value);
    }

    const cavlab::cli::RunConfig cfg = cavlab::cli::parse_config(doc);
    cavlab::cli::run_command(command, cfg, std::cout);
    return 0;
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << cavlab::cli::error_json(e).dump() << "\n";
    return cavlab::cli::exit_code_for(e);
  }
}
