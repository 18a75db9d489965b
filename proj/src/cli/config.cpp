#include "cavlab/cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cavlab/errors.hpp"
#include "schema_data.hpp"

namespace cavlab::cli {

namespace {

std::string type_of(const json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_null()) return "null";
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  return "number";
}

bool type_matches(const json& v, const std::string& t) {
  const std::string actual = type_of(v);
  if (t == actual) return true;
  if (t == "number" && actual == "integer") return true;
  // 3.0 is accepted where an integer is expected.
  if (t == "integer" && actual == "number") {
    const double d = v.get<double>();
    return std::isfinite(d) && d == std::floor(d);
  }
  return false;
}

std::string where(const std::string& path) { return path.empty() ? "<root>" : path; }

// Returns an empty string when valid, else the first violation.
std::string check(const json& v, const json& s, const json& root, const std::string& path) {
  if (s.contains("$ref")) {
    const std::string ref = s["$ref"].get<std::string>();
    const std::string prefix = "#/$defs/";
    if (ref.rfind(prefix, 0) != 0) return "unsupported $ref " + ref;
    return check(v, root["$defs"][ref.substr(prefix.size())], root, path);
  }
  if (s.contains("oneOf")) {
    std::size_t ok = 0;
    std::string first;
    for (const auto& sub : s["oneOf"]) {
      const std::string e = check(v, sub, root, path);
      if (e.empty()) ++ok;
      else if (first.empty()) first = e;
    }
    if (ok == 1) return {};
    if (ok == 0) {
      // Report against the alternative selected by "kind" when there is one.
      if (v.is_object() && v.contains("kind"))
        for (const auto& sub : s["oneOf"]) {
          const auto& props = sub.value("properties", json::object());
          if (props.contains("kind") && props["kind"].contains("enum") &&
              props["kind"]["enum"].front() == v["kind"])
            return check(v, sub, root, path);
        }
      return where(path) + ": matches none of the allowed forms (" + first + ")";
    }
    return where(path) + ": matches more than one allowed form";
  }
  if (s.contains("type") && !type_matches(v, s["type"].get<std::string>()))
    return where(path) + ": expected " + s["type"].get<std::string>() + ", got " + type_of(v);
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) return where(path) + ": value " + v.dump() + " not in " + s["enum"].dump();
  }
  if (v.is_number()) {
    const double d = v.get<double>();
    if (s.contains("minimum") && d < s["minimum"].get<double>())
      return where(path) + ": " + v.dump() + " is below the minimum " + s["minimum"].dump();
    if (s.contains("maximum") && d > s["maximum"].get<double>())
      return where(path) + ": " + v.dump() + " is above the maximum " + s["maximum"].dump();
    if (s.contains("exclusiveMinimum") && !(d > s["exclusiveMinimum"].get<double>()))
      return where(path) + ": " + v.dump() + " must be greater than " + s["exclusiveMinimum"].dump();
    if (!std::isfinite(d)) return where(path) + ": non-finite number";
  }
  if (v.is_object()) {
    const json props = s.value("properties", json::object());
    for (const auto& key : s.value("required", json::array()))
      if (!v.contains(key.get<std::string>()))
        return where(path) + ": missing required key \"" + key.get<std::string>() + "\"";
    for (auto it = v.begin(); it != v.end(); ++it) {
      const std::string child = path + "/" + it.key();
      if (props.contains(it.key())) {
        const std::string e = check(it.value(), props[it.key()], root, child);
        if (!e.empty()) return e;
      } else if (s.contains("additionalProperties") && s["additionalProperties"] == false) {
        return where(path) + ": unknown key \"" + it.key() + "\"";
      }
    }
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
      return where(path) + ": needs at least " + s["minItems"].dump() + " items";
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
      return where(path) + ": allows at most " + s["maxItems"].dump() + " items";
    if (s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string e = check(v[i], s["items"], root, path + "/" + std::to_string(i));
        if (!e.empty()) return e;
      }
  }
  return {};
}

template <class T>
void get(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj[key].get<T>();
}

void get_size(const json& obj, const char* key, std::size_t& out) {
  if (obj.contains(key)) out = static_cast<std::size_t>(std::llround(obj[key].get<double>()));
}

AxisSpec axis_from(const json& j) {
  AxisSpec a;
  a.x_min = j["x_min"].get<double>();
  a.x_max = j["x_max"].get<double>();
  a.n = static_cast<std::size_t>(std::llround(j["n"].get<double>()));
  if (!(a.x_max > a.x_min)) throw ConfigError("grid axis needs x_min < x_max");
  return a;
}

json axis_json(const AxisSpec& a) { return json{{"x_min", a.x_min}, {"x_max", a.x_max}, {"n", a.n}}; }

json potential_defaults(const json& p) {
  const std::string kind = p["kind"].get<std::string>();
  json out = json{{"kind", kind}};
  if (kind == "harmonic") {
    out["omega0"] = p.value("omega0", 1.0);
    out["mass"] = p.value("mass", 1.0);
  } else if (kind == "double_well") {
    out["barrier"] = p.value("barrier", 2.0);
    out["a"] = p.value("a", 1.0);
  } else if (kind == "morse") {
    out["depth"] = p.value("depth", 1.0);
    out["alpha"] = p.value("alpha", 1.0);
    out["x_e"] = p.value("x_e", 0.0);
  } else {
    out["coefficients"] = p["coefficients"];
  }
  // Integers in the input become doubles so the round trip is exact.
  for (auto it = out.begin(); it != out.end(); ++it)
    if (it.value().is_number()) it.value() = it.value().get<double>();
  if (out.contains("coefficients")) {
    json c = json::array();
    for (const auto& v : out["coefficients"]) c.push_back(v.get<double>());
    out["coefficients"] = c;
  }
  return out;
}

}  // namespace

std::vector<double> SweepSpec::resolved(double fallback) const {
  if (!epsilons.empty()) return epsilons;
  if (epsilon_log) {
    std::vector<double> out;
    const auto& l = *epsilon_log;
    if (l.count == 1) return {l.min};
    const double a = std::log(l.min), b = std::log(l.max);
    for (std::size_t i = 0; i < l.count; ++i)
      out.push_back(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(l.count - 1)));
    return out;
  }
  return {fallback};
}

const json& run_config_schema() {
  static const json schema = json::parse(kRunConfigSchema);
  return schema;
}

void validate_against_schema(const json& doc, const json& schema) {
  const std::string e = check(doc, schema, schema, "");
  if (!e.empty()) throw ConfigError("config " + e);
}

RunConfig parse_config(const json& doc) {
  validate_against_schema(doc, run_config_schema());
  RunConfig c;
  if (doc.contains("physical")) {
    const auto& p = doc["physical"];
    get(p, "m", c.physical.m);
    get(p, "omega", c.physical.omega);
    get(p, "hbar", c.physical.hbar);
    get(p, "epsilon", c.physical.epsilon);
  }
  if (doc.contains("potential")) c.potential = potential_defaults(doc["potential"]);
  else c.potential = potential_defaults(c.potential);
  get(doc, "gauge", c.gauge);
  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    get(g, "mode", c.grid.mode);
    get_size(g, "levels", c.grid.levels);
    get(g, "tail", c.grid.tail);
    get(g, "margin", c.grid.margin);
    get_size(g, "max_points", c.grid.max_points);
    if (g.contains("matter")) c.grid.matter = axis_from(g["matter"]);
    if (g.contains("cavity")) c.grid.cavity = axis_from(g["cavity"]);
  }
  if (c.grid.mode == "manual") {
    if (!c.grid.matter) throw ConfigError("config /grid: manual mode needs a matter axis");
    if (c.gauge != "semiclassical" && !c.grid.cavity)
      throw ConfigError("config /grid: manual mode needs a cavity axis for gauge " + c.gauge);
  }
  if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
  get_size(doc, "threads", c.threads);
  get(doc, "output_dir", c.output_dir);
  if (doc.contains("spectrum")) {
    const auto& s = doc["spectrum"];
    get_size(s, "k", c.spectrum.k);
    get(s, "method", c.spectrum.method);
    get(s, "tol", c.spectrum.tol);
    get(s, "certify", c.spectrum.certify);
  }
  if (doc.contains("gauge_check")) {
    const auto& s = doc["gauge_check"];
    get_size(s, "levels", c.gauge_check.levels);
    get(s, "tolerance", c.gauge_check.tolerance);
    get(s, "certify", c.gauge_check.certify);
  }
  if (doc.contains("propagate")) {
    const auto& s = doc["propagate"];
    get(s, "x0", c.propagate.x0);
    get(s, "p0", c.propagate.p0);
    get(s, "sigma", c.propagate.sigma);
    get(s, "dt", c.propagate.dt);
    get_size(s, "steps", c.propagate.steps);
    get_size(s, "record_every", c.propagate.record_every);
    get_size(s, "snapshot_every", c.propagate.snapshot_every);
  }
  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    get(s, "task", c.sweep.task);
    get(s, "epsilons", c.sweep.epsilons);
    if (s.contains("epsilon_log")) {
      SweepSpec::Log l;
      l.min = s["epsilon_log"]["min"].get<double>();
      l.max = s["epsilon_log"]["max"].get<double>();
      get_size(s["epsilon_log"], "count", l.count);
      if (!(l.max >= l.min)) throw ConfigError("config /sweep/epsilon_log: max must be >= min");
      c.sweep.epsilon_log = l;
    }
    if (!c.sweep.epsilons.empty() && c.sweep.epsilon_log)
      throw ConfigError("config /sweep: give either epsilons or epsilon_log, not both");
  }
  if (doc.contains("classical")) {
    const auto& s = doc["classical"];
    get(s, "system", c.classical.system);
    get(s, "lambda", c.classical.lambda);
    get(s, "wx", c.classical.wx);
    get(s, "wy", c.classical.wy);
    get(s, "mass", c.classical.mass);
    get(s, "energy", c.classical.energy);
    if (s.contains("seeds"))
      for (const auto& p : s["seeds"]) c.classical.seeds.emplace_back(p[0].get<double>(), p[1].get<double>());
    get_size(s, "section_axis", c.classical.section_axis);
    get(s, "dt", c.classical.dt);
    get_size(s, "crossings", c.classical.crossings);
    get(s, "order", c.classical.order);
    get_size(s, "fraction_seeds", c.classical.fraction_seeds);
    get(s, "sali_t_max", c.classical.sali_t_max);
    get(s, "sali_chaotic", c.classical.sali_chaotic);
    get(s, "sali_regular", c.classical.sali_regular);
  }
  if (doc.contains("compare")) {
    const auto& s = doc["compare"];
    get(s, "x0", c.compare.x0);
    get(s, "p0", c.compare.p0);
    get(s, "sigma", c.compare.sigma);
    get(s, "t_max", c.compare.t_max);
    get(s, "dt", c.compare.dt);
    get(s, "classical_dt", c.compare.classical_dt);
    get(s, "record_interval", c.compare.record_interval);
    get_size(s, "samples", c.compare.samples);
    get(s, "threshold", c.compare.threshold);
  }
  if (doc.contains("husimi")) {
    const auto& s = doc["husimi"];
    get(s, "state", c.husimi.state);
    get_size(s, "index", c.husimi.index);
    get(s, "x0", c.husimi.x0);
    get(s, "p0", c.husimi.p0);
    get(s, "sigma", c.husimi.sigma);
    get_size(s, "nx", c.husimi.nx);
    get_size(s, "np", c.husimi.np);
  }
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json j;
  j["physical"] = {{"m", c.physical.m}, {"omega", c.physical.omega}, {"hbar", c.physical.hbar},
                   {"epsilon", c.physical.epsilon}};
  j["potential"] = c.potential;
  j["gauge"] = c.gauge;
  json g = {{"mode", c.grid.mode}, {"levels", c.grid.levels}, {"tail", c.grid.tail}, {"margin", c.grid.margin},
            {"max_points", c.grid.max_points}};
  if (c.grid.matter) g["matter"] = axis_json(*c.grid.matter);
  if (c.grid.cavity) g["cavity"] = axis_json(*c.grid.cavity);
  j["grid"] = g;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir;
  j["spectrum"] = {{"k", c.spectrum.k}, {"method", c.spectrum.method}, {"tol", c.spectrum.tol},
                   {"certify", c.spectrum.certify}};
  j["gauge_check"] = {{"levels", c.gauge_check.levels}, {"tolerance", c.gauge_check.tolerance},
                      {"certify", c.gauge_check.certify}};
  const auto& p = c.propagate;
  j["propagate"] = {{"x0", p.x0}, {"p0", p.p0}, {"sigma", p.sigma}, {"dt", p.dt}, {"steps", p.steps},
                    {"record_every", p.record_every}, {"snapshot_every", p.snapshot_every}};
  json sw = {{"task", c.sweep.task}, {"epsilons", c.sweep.epsilons}};
  if (c.sweep.epsilon_log)
    sw["epsilon_log"] = {{"min", c.sweep.epsilon_log->min}, {"max", c.sweep.epsilon_log->max},
                         {"count", c.sweep.epsilon_log->count}};
  j["sweep"] = sw;
  const auto& k = c.classical;
  json seeds = json::array();
  for (const auto& s : k.seeds) seeds.push_back(json::array({s.first, s.second}));
  j["classical"] = {{"system", k.system},
                    {"lambda", k.lambda},
                    {"wx", k.wx},
                    {"wy", k.wy},
                    {"mass", k.mass},
                    {"energy", k.energy},
                    {"seeds", seeds},
                    {"section_axis", k.section_axis},
                    {"dt", k.dt},
                    {"crossings", k.crossings},
                    {"order", k.order},
                    {"fraction_seeds", k.fraction_seeds},
                    {"sali_t_max", k.sali_t_max},
                    {"sali_chaotic", k.sali_chaotic},
                    {"sali_regular", k.sali_regular}};
  const auto& m = c.compare;
  j["compare"] = {{"x0", m.x0},
                  {"p0", m.p0},
                  {"sigma", m.sigma},
                  {"t_max", m.t_max},
                  {"dt", m.dt},
                  {"classical_dt", m.classical_dt},
                  {"record_interval", m.record_interval},
                  {"samples", m.samples},
                  {"threshold", m.threshold}};
  const auto& h = c.husimi;
  j["husimi"] = {{"state", h.state}, {"index", h.index}, {"x0", h.x0}, {"p0", h.p0},
                 {"sigma", h.sigma}, {"nx", h.nx},       {"np", h.np}};
  return j;
}

PotentialModel potential_model(const RunConfig& c) {
  const auto& p = c.potential;
  const std::string kind = p["kind"].get<std::string>();
  try {
    if (kind == "harmonic") return PotentialModel::harmonic(p["omega0"].get<double>(), p["mass"].get<double>());
    if (kind == "double_well") return PotentialModel::double_well(p["barrier"].get<double>(), p["a"].get<double>());
    if (kind == "morse")
      return PotentialModel::morse(p["depth"].get<double>(), p["alpha"].get<double>(), p["x_e"].get<double>());
    return PotentialModel::polynomial(p["coefficients"].get<std::vector<double>>());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config /potential: ") + e.what());
  }
}

Gauge gauge_of(const RunConfig& c) {
  try {
    return gauge_from_string(c.gauge);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config /gauge: ") + e.what());
  }
}

std::string resolve_output_dir(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("CAVLAB_OUTPUT_DIR"); env && *env) return env;
  return "cavlab_out";
}

void set_path(json& doc, const std::string& path, json value) {
  json* cur = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t slash = path.find('/', start);
    const std::string key = path.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
    if (slash == std::string::npos) {
      (*cur)[key] = std::move(value);
      return;
    }
    if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = json::object();
    cur = &(*cur)[key];
    start = slash + 1;
  }
}

}  // namespace cavlab::cli
