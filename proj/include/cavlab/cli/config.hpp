#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cavlab/basis_grid.hpp"
#include "cavlab/coupling_model.hpp"
#include "cavlab/hamiltonians.hpp"
#include "cavlab/potentials.hpp"

namespace cavlab::cli {

using json = nlohmann::ordered_json;

struct AxisSpec {
  double x_min = -1.0, x_max = 1.0;
  std::size_t n = 64;
  bool operator==(const AxisSpec&) const = default;
};

struct GridSpec {
  std::string mode = "auto";  // auto | manual
  std::size_t levels = 20;
  double tail = 1e-5;
  double margin = 1.2;
  std::size_t max_points = 1024;
  std::optional<AxisSpec> matter, cavity;
  bool operator==(const GridSpec&) const = default;
};

struct SpectrumSpec {
  std::size_t k = 10;
  std::string method = "auto";
  double tol = 1e-8;
  bool certify = false;
  bool operator==(const SpectrumSpec&) const = default;
};

struct GaugeCheckSpec {
  std::size_t levels = 20;
  double tolerance = 1e-8;
  bool certify = true;
  bool operator==(const GaugeCheckSpec&) const = default;
};

struct PropagateSpec {
  double x0 = 1.0, p0 = 0.0;
  double sigma = 0.0;  // 0: width of the local harmonic fit
  double dt = 0.002;
  std::size_t steps = 5000;
  std::size_t record_every = 50;
  std::size_t snapshot_every = 0;
  bool operator==(const PropagateSpec&) const = default;
};

struct SweepSpec {
  std::string task = "params";
  std::vector<double> epsilons;
  struct Log {
    double min = 0.01, max = 100.0;
    std::size_t count = 25;
    bool operator==(const Log&) const = default;
  };
  std::optional<Log> epsilon_log;
  /// Explicit list, or the log range, or the single physical epsilon.
  std::vector<double> resolved(double fallback) const;
  bool operator==(const SweepSpec&) const = default;
};

struct ClassicalSpec {
  std::string system = "henon_heiles";
  double lambda = 1.0, wx = 1.0, wy = 1.4142135623730951, mass = 1.0;
  double energy = 0.125;
  std::vector<std::pair<double, double>> seeds;  // empty: a line of 8 seeds
  std::size_t section_axis = 0;
  double dt = 0.01;
  std::size_t crossings = 300;
  int order = 4;
  std::size_t fraction_seeds = 0;
  double sali_t_max = 1000.0;
  double sali_chaotic = 1e-8;
  double sali_regular = 1e-4;
  bool operator==(const ClassicalSpec&) const = default;
};

struct CompareSpec {
  double x0 = 1.0, p0 = 0.0;
  double sigma = 0.0;
  double t_max = 20.0;
  double dt = 0.001;
  double classical_dt = 0.0025;
  double record_interval = 0.05;
  std::size_t samples = 10000;
  double threshold = 0.1;
  bool operator==(const CompareSpec&) const = default;
};

struct HusimiSpec {
  std::string state = "eigen";
  std::size_t index = 0;
  double x0 = 1.0, p0 = 0.0;
  double sigma = 0.0;
  std::size_t nx = 128, np = 128;
  bool operator==(const HusimiSpec&) const = default;
};

/// Fully resolved configuration: every field has a value after parsing.
struct RunConfig {
  PhysicalParams physical;
  json potential = json{{"kind", "harmonic"}, {"omega0", 1.0}, {"mass", 1.0}};
  std::string gauge = "MG";
  GridSpec grid;
  std::uint64_t seed = 0x2545F4914F6CDD1DULL;
  std::size_t threads = 0;  // 0: available parallelism
  std::string output_dir;   // empty: CAVLAB_OUTPUT_DIR, else ./cavlab_out
  SpectrumSpec spectrum;
  GaugeCheckSpec gauge_check;
  PropagateSpec propagate;
  SweepSpec sweep;
  ClassicalSpec classical;
  CompareSpec compare;
  HusimiSpec husimi;

  bool operator==(const RunConfig&) const = default;
};

/// The published schema (schema/run_config.schema.json), compiled in.
const json& run_config_schema();

/// Minimal JSON-schema check (type, properties, additionalProperties,
/// required, enum, minimum/maximum, exclusiveMinimum, items, minItems,
/// maxItems, oneOf, $ref). Throws ConfigError naming the offending path.
void validate_against_schema(const json& doc, const json& schema);

/// Validates then materializes defaults. Throws ConfigError.
RunConfig parse_config(const json& doc);
RunConfig load_config_file(const std::string& path);
/// Resolved form with every default written out; parse_config(to_json(c)) == c.
json to_json(const RunConfig& c);

PotentialModel potential_model(const RunConfig& c);
Gauge gauge_of(const RunConfig& c);
/// Output directory: config value, else $CAVLAB_OUTPUT_DIR, else ./cavlab_out.
std::string resolve_output_dir(const RunConfig& c);

/// Sets a value at a '/'-separated path, creating objects along the way.
void set_path(json& doc, const std::string& path, json value);

}  // namespace cavlab::cli
