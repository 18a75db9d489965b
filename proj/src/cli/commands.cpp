#include "cavlab/cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "cavlab/classical.hpp"
#include "cavlab/diagnostics.hpp"
#include "cavlab/dynamics.hpp"
#include "cavlab/errors.hpp"
#include "cavlab/grid_advisor.hpp"
#include "cavlab/husimi.hpp"
#include "cavlab/spectra.hpp"
#include "cavlab/tunneling.hpp"

namespace cavlab::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string show(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json dressed_json(const PhysicalParams& p) {
  const DressedParams d = dressed_params(p);
  const CouplingRegime r = classify_regime(p);
  return json{{"epsilon", p.epsilon}, {"varsigma", d.varsigma}, {"M", d.M},
              {"zeta", d.zeta},       {"mu", d.mu},             {"Omega", d.Omega},
              {"xi", d.xi},           {"hbar_eff", d.hbar_eff}, {"epsilon_max", d.epsilon_max},
              {"ratio", r.ratio},     {"regime", to_string(r.label)}};
}

AdvisorOptions advisor_of(const RunConfig& c) {
  AdvisorOptions a;
  a.tail = c.grid.tail;
  a.margin = c.grid.margin;
  a.max_points = c.grid.max_points;
  return a;
}

EigenOptions eigen_of(const RunConfig& c, std::size_t k) {
  EigenOptions e;
  e.k = k;
  e.method = eigen_method_from_string(c.spectrum.method);
  e.tol = c.spectrum.tol;
  e.seed = c.seed;
  return e;
}

AxisGrid axis_of(const AxisSpec& a, AxisLabel label) { return make_axis(a.x_min, a.x_max, a.n, label); }

ProductGrid grid_for(const RunConfig& c, Gauge g, const PhysicalParams& p, const PotentialModel& V,
                     std::size_t levels) {
  if (c.grid.mode == "auto") return advise_grid(g, p, V, levels, advisor_of(c));
  const AxisGrid m = axis_of(*c.grid.matter, AxisLabel::matter_x);
  if (g == Gauge::semiclassical) return build_matter_grid(m, dressed_params(p).hbar_eff);
  const AxisGrid q = axis_of(*c.grid.cavity, g == Gauge::AG_rescaled ? AxisLabel::cavity_Q : AxisLabel::cavity_q);
  return build_product_grid(m, q, p.hbar);
}

GridOperator operator_for(Gauge g, const PhysicalParams& p, const PotentialModel& V, const ProductGrid& grid) {
  HamiltonianSpec s;
  s.gauge = g;
  s.physical = p;
  s.potential = V;
  s.grid = grid;
  if (g == Gauge::semiclassical) s.grid = build_matter_grid(grid.matter, p.hbar);
  return build_operator(s);
}

json grid_json(const ProductGrid& g) {
  auto ax = [](const AxisGrid& a) {
    return json{{"x_min", a.x_min}, {"x_max", a.x_max}, {"n", a.n}, {"label", to_string(a.label)}};
  };
  json j{{"matter", ax(g.matter)}, {"hbar", g.hbar}};
  if (g.cavity) j["cavity"] = ax(*g.cavity);
  return j;
}

json certification_json(const Certification& c) {
  return json{{"performed", c.performed},
              {"passed", c.passed},
              {"tolerance", c.tolerance},
              {"max_relative_change", c.max_relative_change},
              {"refined_grid", grid_json(c.refined_grid)},
              {"protocol", c.protocol}};
}

// Output files are registered relative to the output directory.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
  const std::string& dir() const { return dir_; }
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }
  std::ofstream open(const std::string& name) {
    std::ofstream f(path(name), std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + path(name));
    names_.push_back(name);
    return f;
  }
  void add_existing(const std::string& absolute) { names_.push_back(fs::path(absolute).filename().string()); }
  std::vector<OutputDigest> digests() const {
    std::vector<OutputDigest> out;
    for (const auto& n : names_) out.push_back({n, sha256_file(path(n))});
    return out;
  }

 private:
  std::string dir_;
  std::vector<std::string> names_;
};

// Independent work items on a pool; results land in index order.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double matter_mass(Gauge g, const PhysicalParams& p) {
  return (g == Gauge::AG || g == Gauge::AG_rescaled) ? dressed_params(p).M : p.m;
}

RunManifest cmd_params(const RunConfig& c, std::ostream& out, RunManifest m) {
  const json d = dressed_json(c.physical);
  const std::vector<std::pair<const char*, const char*>> rows = {
      {"epsilon", "epsilon"}, {"varsigma", "varsigma"}, {"M", "M"},
      {"zeta", "zeta"},       {"mu", "mu"},             {"Omega", "Omega"},
      {"xi", "xi"},           {"hbar_eff", "hbar_eff"}, {"epsilon_max", "epsilon_max"},
      {"ratio", "ratio"}};
  for (const auto& [label, key] : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-12s %s\n", label, show(d[key].get<double>()).c_str());
    out << buf;
  }
  out << "regime       " << d["regime"].get<std::string>() << "\n";
  m.dressed.push_back(d);
  return m;
}

RunManifest cmd_spectrum(const RunConfig& c, std::ostream& out, RunManifest m, Outputs& files) {
  const Gauge g = gauge_of(c);
  const PotentialModel V = potential_model(c);
  const PhysicalParams p = c.physical;
  const ProductGrid grid = grid_for(c, g, p, V, std::max(c.grid.levels, c.spectrum.k));
  const EigenOptions eo = eigen_of(c, c.spectrum.k);
  SpectrumResult r;
  if (c.spectrum.certify) {
    r = certified_eigen([&](const ProductGrid& gg) { return operator_for(g, p, V, gg); }, grid, eo);
    m.certifications.push_back(certification_json(r.certification));
  } else {
    r = eigen(operator_for(g, p, V, grid), eo);
  }
  {
    auto f = files.open("spectrum.csv");
    write_spectrum_csv(f, {r});
  }
  out << "gauge " << to_string(g) << ", epsilon " << show(p.epsilon) << ", method " << to_string(r.method)
      << ", grid " << r.grid.matter.n << (r.grid.cavity ? "x" + std::to_string(r.grid.cavity->n) : "") << "\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%4zu  %.12f\n", i, r.eigenvalues[i]);
    out << buf;
  }
  if (r.certification.performed)
    out << "certification " << (r.certification.passed ? "PASS" : "FAIL") << " (max relative change "
        << show(r.certification.max_relative_change) << ")\n";
  m.dressed.push_back(dressed_json(p));
  m.summary = {{"method", to_string(r.method)}, {"grid", grid_json(r.grid)}, {"matvecs", r.matvecs}};
  return m;
}

RunManifest cmd_gauge_check(const RunConfig& c, std::ostream& out, RunManifest m, Outputs& files) {
  GaugeAuditOptions o;
  o.levels = c.gauge_check.levels;
  o.tolerance = c.gauge_check.tolerance;
  o.certify = c.gauge_check.certify;
  o.eigen = eigen_of(c, o.levels);
  o.advisor = advisor_of(c);
  const GaugeAudit a = gauge_audit(c.physical, potential_model(c), o);
  {
    auto f = files.open("gauge_check.csv");
    f << "level,mg,ag,relative_delta,pass\n";
    for (const auto& r : a.rows)
      f << r.level << "," << num(r.mg) << "," << num(r.ag) << "," << num(r.relative_delta) << ","
        << (r.relative_delta <= a.tolerance ? "PASS" : "FAIL") << "\n";
  }
  out << "level            MG                AG        rel. delta\n";
  for (const auto& r : a.rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%5zu  %16.12f  %16.12f  %10.3e  %s\n", r.level, r.mg, r.ag, r.relative_delta,
                  r.relative_delta <= a.tolerance ? "PASS" : "FAIL");
    out << buf;
  }
  out << (a.passed ? "PASS" : "FAIL") << ": max relative delta " << show(a.max_relative_delta) << " (tolerance "
      << show(a.tolerance) << ")\n";
  m.dressed.push_back(dressed_json(c.physical));
  if (a.mg.certification.performed) m.certifications.push_back(certification_json(a.mg.certification));
  if (a.ag.certification.performed) m.certifications.push_back(certification_json(a.ag.certification));
  m.summary = {{"passed", a.passed}, {"max_relative_delta", a.max_relative_delta}, {"tolerance", a.tolerance}};
  return m;
}

RunManifest cmd_sweep(const RunConfig& c, std::ostream& out, RunManifest m, Outputs& files) {
  const std::vector<double> eps = c.sweep.resolved(c.physical.epsilon);
  const std::string task = c.sweep.task;
  const PotentialModel V = potential_model(c);
  struct Row {
    std::string quantity;
    std::size_t index;
    double value;
  };
  std::vector<std::vector<Row>> rows(eps.size());
  std::vector<std::string> notes(eps.size());
  const Gauge g = gauge_of(c);
  parallel_for(eps.size(), c.threads, [&](std::size_t i) {
    DiagnosticCapture capture;
    PhysicalParams p = c.physical;
    p.epsilon = eps[i];
    const DressedParams d = dressed_params(p);
    if (task == "params") {
      for (const auto& [k, v] : std::vector<std::pair<std::string, double>>{{"varsigma", d.varsigma},
                                                                            {"M", d.M},
                                                                            {"zeta", d.zeta},
                                                                            {"mu", d.mu},
                                                                            {"Omega", d.Omega},
                                                                            {"xi", d.xi}})
        rows[i].push_back({k, 0, v});
    } else if (task == "spectrum") {
      const ProductGrid grid = grid_for(c, g, p, V, std::max(c.grid.levels, c.spectrum.k));
      const SpectrumResult r = eigen(operator_for(g, p, V, grid), eigen_of(c, c.spectrum.k));
      for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) rows[i].push_back({"energy", k, r.eigenvalues[k]});
    } else {
      try {
        const TunnelingResult t = tunneling_splitting(semiclassical_operator(p, V, 4, advisor_of(c)));
        rows[i].push_back({"splitting", 0, t.splitting});
        rows[i].push_back({"even_energy", 0, t.even_energy});
        rows[i].push_back({"odd_energy", 0, t.odd_energy});
      } catch (const InvalidArgument& e) {
        rows[i].push_back({"splitting", 0, std::nan("")});
        notes[i] = e.what();
      }
    }
  });
  {
    auto f = files.open("sweep.csv");
    f << "epsilon,hbar_eff,quantity,index,value\n";
    for (std::size_t i = 0; i < eps.size(); ++i) {
      PhysicalParams p = c.physical;
      p.epsilon = eps[i];
      const double he = dressed_params(p).hbar_eff;
      for (const auto& r : rows[i])
        f << num(eps[i]) << "," << num(he) << "," << r.quantity << "," << r.index << "," << num(r.value) << "\n";
    }
  }
  json skipped = json::array();
  for (std::size_t i = 0; i < eps.size(); ++i) {
    PhysicalParams p = c.physical;
    p.epsilon = eps[i];
    m.dressed.push_back(dressed_json(p));
    if (!notes[i].empty()) skipped.push_back({{"epsilon", eps[i]}, {"reason", notes[i]}});
  }
  out << "sweep task " << task << ": " << eps.size() << " points";
  if (!skipped.empty()) out << " (" << skipped.size() << " without a result)";
  out << ", written to " << files.path("sweep.csv") << "\n";
  m.summary = {{"task", task}, {"points", eps.size()}, {"skipped", skipped}};
  return m;
}

RunManifest cmd_propagate(const RunConfig& c, std::ostream& out, RunManifest m, Outputs& files) {
  const Gauge g = gauge_of(c);
  const PotentialModel V = potential_model(c);
  const PhysicalParams p = c.physical;
  const ProductGrid grid = grid_for(c, g, p, V, c.grid.levels);
  const GridOperator op = operator_for(g, p, V, grid);
  const auto& s = c.propagate;
  const double sigma = s.sigma > 0.0 ? s.sigma : local_coherent_width(V, matter_mass(g, p), op.grid.hbar, s.x0);
  const WaveField psi0 = coherent_state(op, s.x0, s.p0, sigma);
  PropagateOptions o;
  o.dt = s.dt;
  o.n_steps = s.steps;
  o.record_every = s.record_every;
  o.snapshot_every = s.snapshot_every;
  o.snapshot_dir = files.dir();
  const PropagationRecord rec = propagate(op, psi0, o);
  {
    auto f = files.open("propagation.csv");
    write_csv(rec, f);
  }
  for (const auto& snap : rec.snapshots) files.add_existing(snap);
  out << "propagated " << s.steps << " steps of " << show(s.dt) << " in gauge " << to_string(g) << " on "
      << op.grid.matter.n << (op.grid.cavity ? "x" + std::to_string(op.grid.cavity->n) : "") << " points\n"
      << "norm drift per step " << show(rec.norm_drift_per_step) << ", max energy error "
      << show(rec.max_energy_error) << "\n";
  m.dressed.push_back(dressed_json(p));
  m.summary = {{"grid", grid_json(op.grid)},
               {"sigma", sigma},
               {"norm_drift_per_step", rec.norm_drift_per_step},
               {"max_energy_error", rec.max_energy_error},
               {"energy_drift", rec.energy_drift},
               {"snapshots", rec.snapshots.size()}};
  return m;
}

ClassicalSystem classical_system(const ClassicalSpec& k) {
  if (k.system == "henon_heiles") return ClassicalSystem::henon_heiles(k.lambda, k.mass);
  return ClassicalSystem::harmonic_2d(k.wx, k.wy, k.mass);
}

RunManifest cmd_classical(const RunConfig& c, std::ostream& out, RunManifest m, Outputs& files) {
  const auto& k = c.classical;
  const ClassicalSystem sys = classical_system(k);
  SectionSpec spec;
  spec.axis = k.section_axis;
  std::vector<std::pair<double, double>> seeds = k.seeds;
  if (seeds.empty()) {
    const auto [lo, hi] = section_interval(sys, k.energy, spec);
    for (int i = 0; i < 8; ++i) seeds.emplace_back(lo + (hi - lo) * (i + 0.5) / 8.0, 0.0);
  }
  SectionOptions so;
  so.dt = k.dt;
  so.crossings = k.crossings;
  so.order = k.order;
  const PoincareSection sec = poincare_section(sys, k.energy, seeds, spec, so);
  SaliOptions sali_opts;
  sali_opts.dt = k.dt;
  sali_opts.t_max = k.sali_t_max;
  sali_opts.chaotic_threshold = k.sali_chaotic;
  sali_opts.regular_threshold = k.sali_regular;
  sali_opts.order = k.order;
  std::vector<OrbitClass> cls(seeds.size());
  parallel_for(seeds.size(), c.threads, [&](std::size_t i) {
    cls[i] = sec.escaped[i] ? OrbitClass::escaped
                            : sali(sys, state_on_section(sys, k.energy, seeds[i].first, seeds[i].second, spec),
                                   sali_opts)
                                  .orbit;
  });
  {
    auto f = files.open("section.csv");
    const char* names[2][2] = {{"y", "p_y"}, {"x", "p_x"}};
    f << names[spec.axis][0] << "," << names[spec.axis][1] << ",seed_id,class\n";
    for (const auto& pt : sec.points)
      f << num(pt.q) << "," << num(pt.p) << "," << pt.seed << "," << to_string(cls[pt.seed]) << "\n";
  }
  json summary{{"system", sys.kind()},
               {"energy", k.energy},
               {"points", sec.points.size()},
               {"sali", {{"t_max", k.sali_t_max}, {"chaotic_below", k.sali_chaotic}, {"regular_above", k.sali_regular}}}};
  out << sys.kind() << " at E = " << show(k.energy) << ": " << sec.points.size() << " section points from "
      << seeds.size() << " seeds\n";
  if (k.fraction_seeds > 0) {
    FractionOptions fo;
    fo.sali = sali_opts;
    fo.section = spec;
    fo.seed = c.seed;
    const ChaoticFraction cf = chaotic_fraction(sys, k.energy, k.fraction_seeds, fo);
    auto f = files.open("fraction.csv");
    f << "q,p,class\n";
    for (std::size_t i = 0; i < cf.seeds.size(); ++i)
      f << num(cf.seeds[i].first) << "," << num(cf.seeds[i].second) << "," << to_string(cf.classes[i]) << "\n";
    out << "chaotic fraction " << show(cf.fraction) << " +- " << show(cf.uncertainty) << " (" << cf.chaotic
        << " chaotic, " << cf.regular << " regular, " << cf.indeterminate << " indeterminate, " << cf.escaped
        << " escaped)\n";
    summary["chaotic_fraction"] = {{"fraction", cf.fraction},         {"uncertainty", cf.uncertainty},
                                   {"chaotic", cf.chaotic},           {"regular", cf.regular},
                                   {"indeterminate", cf.indeterminate}, {"escaped", cf.escaped}};
  }
  m.dressed.push_back(dressed_json(c.physical));
  m.summary = summary;
  return m;
}

RunManifest cmd_compare(const RunConfig& c, std::ostream& out, RunManifest m, Outputs& files) {
  const PotentialModel V = potential_model(c);
  const PhysicalParams p = c.physical;
  const DressedParams d = dressed_params(p);
  const auto& s = c.compare;
  const double sigma = s.sigma > 0.0 ? s.sigma : local_coherent_width(V, p.m, d.hbar_eff, s.x0);
  HamiltonianSpec hs;
  hs.gauge = Gauge::semiclassical;
  hs.physical = p;
  hs.potential = V;
  hs.grid = c.grid.mode == "manual" ? build_matter_grid(axis_of(*c.grid.matter, AxisLabel::matter_x), p.hbar)
                                    : build_matter_grid(packet_axis(V, p.m, d.hbar_eff, s.x0, s.p0, sigma), p.hbar);
  const GridOperator op = build_semiclassical(hs);
  const WaveField psi0 = coherent_state(op, s.x0, s.p0, sigma);
  PropagateOptions po;
  po.dt = s.dt;
  po.n_steps = static_cast<std::size_t>(std::llround(s.t_max / s.dt));
  po.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s.record_interval / s.dt)));
  const PropagationRecord q = propagate(op, psi0, po);
  EnsembleOptions eo;
  eo.samples = s.samples;
  eo.dt = s.classical_dt;
  eo.n_steps = static_cast<std::size_t>(std::llround(s.t_max / s.classical_dt));
  eo.record_every =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s.record_interval / s.classical_dt)));
  eo.seed = c.seed;
  const TrajectoryEnsembleRecord cl =
      run_ensemble(ClassicalSystem::one_d(V, p.m), WignerGaussian{s.x0, s.p0, sigma, d.hbar_eff}, eo);
  const SpreadComparison cmp = spread_comparison(q, cl, s.threshold);
  {
    auto f = files.open("compare.csv");
    write_csv(cmp, f);
  }
  out << "hbar_eff " << show(d.hbar_eff) << ", sigma " << show(sigma) << ": ";
  if (cmp.divergence_time >= 0.0) out << "variances diverge (>" << show(100 * s.threshold) << "%) at t = " << show(cmp.divergence_time) << "\n";
  else out << "no divergence up to t = " << show(s.t_max) << "\n";
  m.dressed.push_back(dressed_json(p));
  m.summary = {{"divergence_time", cmp.divergence_time},
               {"t_max", s.t_max},
               {"sigma", sigma},
               {"sampling", cl.sampling},
               {"resampled", cmp.resampled},
               {"interpolation_error", cmp.interpolation_error},
               {"classical_max_energy_drift", cl.max_energy_drift},
               {"classical_drift_violations", cl.drift_violations},
               {"quantum_norm_drift_per_step", q.norm_drift_per_step}};
  return m;
}

RunManifest cmd_husimi(const RunConfig& c, std::ostream& out, RunManifest m, Outputs& files) {
  const PotentialModel V = potential_model(c);
  const PhysicalParams p = c.physical;
  const DressedParams d = dressed_params(p);
  const auto& h = c.husimi;
  const ProductGrid grid = grid_for(c, Gauge::semiclassical, p, V, std::max(c.grid.levels, h.index + 1));
  const GridOperator op = operator_for(Gauge::semiclassical, p, V, grid);
  const double x_fit = h.state == "eigen" ? V.argmin() : h.x0;
  const double sigma = h.sigma > 0.0 ? h.sigma : local_coherent_width(V, p.m, d.hbar_eff, x_fit);
  WaveField psi(op.grid);
  if (h.state == "eigen") {
    EigenOptions eo = eigen_of(c, h.index + 1);
    eo.want_vectors = true;
    psi = eigen(op, eo).eigenvectors.at(h.index);
  } else {
    psi = coherent_state(op, h.x0, h.p0, sigma);
  }
  const HusimiResult q = husimi(psi, default_phase_space(op.grid.matter, d.hbar_eff, h.nx, h.np), d.hbar_eff, sigma);
  {
    auto f = files.open("husimi.csv");
    f << "x,p,Q\n";
    for (std::size_t i = 0; i < q.grid.nx; ++i)
      for (std::size_t j = 0; j < q.grid.np; ++j)
        f << num(q.grid.x(i)) << "," << num(q.grid.p(j)) << "," << num(q.at(i, j)) << "\n";
  }
  out << "Husimi of " << (h.state == "eigen" ? "eigenstate " + std::to_string(h.index) : std::string("coherent state"))
      << " at hbar_eff " << show(d.hbar_eff) << ", sigma " << show(sigma) << ": integral " << show(q.integral) << "\n";
  m.dressed.push_back(dressed_json(p));
  m.summary = {{"integral", q.integral}, {"sigma", sigma}, {"hbar_eff", d.hbar_eff}};
  return m;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"params",    "spectrum",  "gauge-check", "sweep",
                                                 "propagate", "classical", "compare",     "husimi"};
  return names;
}

RunManifest run_command(const std::string& name, const RunConfig& cfg, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig c = cfg;
  const bool has_dir = !c.output_dir.empty() || std::getenv("CAVLAB_OUTPUT_DIR") != nullptr;
  c.output_dir = resolve_output_dir(c);
  RunManifest m;
  m.version = artifact_version();
  m.command = name;
  m.config = to_json(c);
  if (name == "params") {
    m = cmd_params(c, out, m);
    if (!has_dir) return m;
    Outputs files(c.output_dir);
    {
      auto f = files.open("params.csv");
      f << "quantity,value\n";
      for (auto it = m.dressed[0].begin(); it != m.dressed[0].end(); ++it)
        if (it.value().is_number()) f << it.key() << "," << num(it.value().get<double>()) << "\n";
    }
    m.outputs = files.digests();
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(m, c.output_dir);
    return m;
  }
  Outputs files(c.output_dir);
  if (name == "spectrum") m = cmd_spectrum(c, out, m, files);
  else if (name == "gauge-check") m = cmd_gauge_check(c, out, m, files);
  else if (name == "sweep") m = cmd_sweep(c, out, m, files);
  else if (name == "propagate") m = cmd_propagate(c, out, m, files);
  else if (name == "classical") m = cmd_classical(c, out, m, files);
  else if (name == "compare") m = cmd_compare(c, out, m, files);
  else if (name == "husimi") m = cmd_husimi(c, out, m, files);
  else throw ConfigError("unknown command \"" + name + "\"");
  m.outputs = files.digests();
  m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(m, c.output_dir);
  if (name == "gauge-check" && !m.summary["passed"].get<bool>())
    throw ConvergenceError("gauge check failed: max relative delta " +
                           show(m.summary["max_relative_delta"].get<double>()));
  return m;
}

RerunReport rerun(const std::string& manifest_path, const std::string& output_dir, std::ostream& out) {
  const RunManifest orig = read_manifest(manifest_path);
  RunConfig c = parse_config(orig.config);
  const std::string base = c.output_dir;
  c.output_dir = output_dir.empty() ? base + "_rerun" : output_dir;
  const RunManifest again = run_command(orig.command, c, out);
  RerunReport r;
  r.output_dir = c.output_dir;
  for (const auto& o : orig.outputs) {
    bool same = false;
    for (const auto& n : again.outputs) same = same || (n.file == o.file && n.sha256 == o.sha256);
    if (!same) r.mismatched.push_back(o.file);
  }
  if (again.outputs.size() != orig.outputs.size()) r.mismatched.push_back("<output set differs>");
  r.identical = r.mismatched.empty();
  out << (r.identical ? "rerun identical: " : "rerun differs: ") << orig.outputs.size() << " outputs compared";
  for (const auto& f : r.mismatched) out << " [" << f << "]";
  out << "\n";
  return r;
}

json error_json(const std::exception& e) {
  json j;
  if (const auto* ce = dynamic_cast<const Error*>(&e)) {
    j["error"] = to_string(ce->kind());
    j["message"] = ce->what();
    j["exit_code"] = exit_code_for(e);
    if (const auto* g = dynamic_cast<const GridSupportError*>(&e)) j["required_extent"] = g->required_extent();
  } else {
    j["error"] = "internal";
    j["message"] = e.what();
    j["exit_code"] = 1;
  }
  return j;
}

int exit_code_for(const std::exception& e) {
  if (const auto* ce = dynamic_cast<const Error*>(&e)) {
    switch (ce->kind()) {
      case ErrorKind::config: return 2;
      case ErrorKind::convergence: return 3;
      case ErrorKind::grid_support: return 4;
      case ErrorKind::invalid_argument: return 1;
    }
  }
  return 1;
}

}  // namespace cavlab::cli
