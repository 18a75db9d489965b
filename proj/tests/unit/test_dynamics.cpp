#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "cavlab/diagnostics.hpp"
#include "cavlab/dynamics.hpp"
#include "cavlab/errors.hpp"
#include "cavlab/spectra.hpp"

using namespace cavlab;

namespace {

GridOperator oscillator_1d(std::size_t n = 128, double L = 8.0) {
  HamiltonianSpec s;
  s.gauge = Gauge::semiclassical;
  s.physical = PhysicalParams{1, 1, 1, 0};
  s.potential = PotentialModel::harmonic(1.0);
  s.grid = build_matter_grid(make_axis(-L, L, n, AxisLabel::matter_x), 1.0);
  return build_operator(s);
}

GridOperator two_axis(Gauge g, double eps) {
  HamiltonianSpec s;
  s.gauge = g;
  s.physical = PhysicalParams{1, 1, 1, eps};
  s.potential = PotentialModel::harmonic(1.0);
  s.grid = build_product_grid(make_axis(-9, 9, 64, AxisLabel::matter_x), make_axis(-9, 9, 64, AxisLabel::cavity_q), 1.0);
  return build_operator(s);
}

}  // namespace

TEST_CASE("Ehrenfest orbit of a displaced oscillator packet") {
  const GridOperator op = oscillator_1d();
  PropagateOptions o;
  o.dt = 1e-3;
  o.n_steps = 6284;  // about one period
  o.record_every = 100;
  const PropagationRecord r = propagate(op, coherent_state(op, 1.5, 0.0, std::sqrt(0.5)), o);
  for (std::size_t i = 0; i < r.times.size(); ++i) CHECK(std::abs(r.x_mean[i] - 1.5 * std::cos(r.times[i])) < 1e-5);
  // Coherent state of the oscillator keeps its width.
  for (double v : r.x_var) CHECK(v == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("norm is conserved to rounding over 10^4 steps") {
  const GridOperator op = oscillator_1d();
  PropagateOptions o;
  o.dt = 1e-3;
  o.n_steps = 10000;
  o.record_every = 1000;
  const PropagationRecord r = propagate(op, coherent_state(op, 1.0, 0.5, 0.8), o);
  CHECK(std::abs(r.norm.back() - r.norm.front()) < 1e-9);
  CHECK(r.norm_drift_per_step < 1e-13);
  CHECK(r.max_energy_error < 1e-6);
}

TEST_CASE("Strang error is second order in dt") {
  const GridOperator op = oscillator_1d();
  const WaveField psi0 = coherent_state(op, 1.0, 0.0, 0.5);  // squeezed: nontrivial dynamics
  auto final_at = [&](double dt) {
    PropagateOptions o;
    o.dt = dt;
    o.n_steps = static_cast<std::size_t>(std::llround(2.0 / dt));
    o.record_every = o.n_steps;
    WaveField out;
    propagate(op, psi0, o, &out);
    return out;
  };
  const WaveField ref = final_at(1e-4), a = final_at(0.02), b = final_at(0.01);
  double ea = 0, eb = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ea = std::max(ea, std::abs(a.data[i] - ref.data[i]));
    eb = std::max(eb, std::abs(b.data[i] - ref.data[i]));
  }
  CHECK(ea / eb == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("eigenstates are stationary") {
  const GridOperator op = oscillator_1d();
  EigenOptions eo;
  eo.k = 3;
  eo.want_vectors = true;
  const SpectrumResult s = eigen(op, eo);
  PropagateOptions o;
  o.dt = 0.01;
  o.n_steps = 1000;
  o.record_every = 100;
  const PropagationRecord r = propagate(op, s.eigenvectors[2], o);
  for (double v : r.survival) CHECK(v > 1 - 1e-9);
}

TEST_CASE("two-axis propagation: MG and AG give the same physical <x>") {
  const double eps = 0.4;
  const GridOperator mg = two_axis(Gauge::MG, eps), ag = two_axis(Gauge::AG, eps);
  const WaveField psi_mg = coherent_state(mg, 1.0, 0.0, 0.7);
  const WaveField psi_ag = apply_ma_unitary(psi_mg, mg.physical, MaDirection::mg_to_ag);
  PropagateOptions o;
  o.dt = 2e-3;
  o.n_steps = 1000;
  o.record_every = 1000;
  WaveField end_mg, end_ag;
  propagate(mg, psi_mg, o, &end_mg);
  propagate(ag, psi_ag, o, &end_ag);
  const double zeta = ag.dressed.zeta;
  const rvec x = coordinate_array(ag.grid, 0), q = coordinate_array(ag.grid, 1);
  rvec shifted(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] + zeta * q[i];
  CHECK(end_mg.expectation(x) == doctest::Approx(end_ag.expectation(shifted)).epsilon(1e-6));
}

TEST_CASE("cavity occupation starts in the dressed vacuum") {
  const GridOperator op = two_axis(Gauge::AG, 1.0);
  const WaveField psi = coherent_state(op, 0.5, 0.0, 0.7);
  const CavityOccupation c = reduced_cavity_occupation(psi, op.dressed);
  CHECK(c.n < 1e-12);
  CHECK(c.captured > 1 - 1e-10);
}

TEST_CASE("edge mass aborts with a grid-support error") {
  const GridOperator op = oscillator_1d(64, 4.0);
  PropagateOptions o;
  o.dt = 0.01;
  o.n_steps = 400;
  CHECK_THROWS_AS(propagate(op, coherent_state(op, 0.0, 4.0, 0.5), o), GridSupportError);
}

TEST_CASE("unnormalized input is rejected") {
  const GridOperator op = oscillator_1d();
  WaveField psi = coherent_state(op, 0.0, 0.0, 1.0);
  for (auto& z : psi.data) z *= 1.01;
  CHECK_THROWS_AS(propagate(op, psi, PropagateOptions{}), InvalidArgument);
}

TEST_CASE("snapshots round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "cavlab_snapshot_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const GridOperator op = oscillator_1d(64);
  PropagateOptions o;
  o.dt = 0.01;
  o.n_steps = 20;
  o.record_every = 10;
  o.snapshot_every = 10;
  o.snapshot_dir = dir.string();
  WaveField end;
  const PropagationRecord r = propagate(op, coherent_state(op, 0.5, 0.0, 0.7), o, &end);
  REQUIRE(r.snapshots.size() == 3);
  const Snapshot s = read_snapshot(r.snapshots.back());
  CHECK(s.version == kSnapshotVersion);
  CHECK(s.rank == 1);
  CHECK(s.n0 == 64);
  CHECK(s.t == doctest::Approx(0.2));
  for (std::size_t i = 0; i < 64; ++i) CHECK(s.data[i] == end.data[i]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("propagation CSV layout") {
  const GridOperator op = oscillator_1d(64);
  PropagateOptions o;
  o.n_steps = 10;
  o.record_every = 5;
  std::ostringstream os;
  write_csv(propagate(op, coherent_state(op, 0.5, 0.0, 0.7), o), os);
  CHECK(os.str().rfind("time,norm,energy,x_mean,x_var,survival,cavity_n\n", 0) == 0);
}

TEST_CASE("spread comparison on identical and on offset time grids") {
  PropagationRecord q;
  TrajectoryEnsembleRecord c;
  for (int i = 0; i <= 40; ++i) {
    const double t = 0.05 * i;
    q.times.push_back(t);
    q.x_var.push_back(1 + t * t);
  }
  c.times = q.times;
  c.var_x = q.x_var;
  SpreadComparison s = spread_comparison(q, c);
  CHECK_FALSE(s.resampled);
  CHECK(s.divergence_time < 0);
  // Classical variance sampled more coarsely and growing faster.
  c.times.clear();
  c.var_x.clear();
  for (int i = 0; i <= 16; ++i) {
    const double t = 0.125 * i;
    c.times.push_back(t);
    c.var_x.push_back(1 + 1.5 * t * t);
  }
  s = spread_comparison(q, c, 0.1);
  CHECK(s.resampled);
  CHECK(s.interpolation_error < 1e-2);
  // 0.5 t^2 / (1 + 1.5 t^2) first exceeds 0.1 near t = 0.5.
  CHECK(s.divergence_time == doctest::Approx(0.5).epsilon(0.11));
}

TEST_CASE("packet axis holds the packet and resolves its momentum") {
  const PotentialModel V = PotentialModel::polynomial({0, 0, 0, 0, 1});
  const AxisGrid a = packet_axis(V, 1.0, 0.1, 1.0, 0.0, 0.2);
  CHECK(a.x_min < -1.0);
  CHECK(a.x_max > 1.0);
  // Largest classical momentum at E = 1 is sqrt 2; the axis must resolve it.
  CHECK(std::numbers::pi / a.dx() * 0.1 > std::sqrt(2.0));
}

TEST_CASE("coarse steps warn") {
  const GridOperator op = oscillator_1d(256);
  DiagnosticCapture cap;
  PropagateOptions o;
  o.dt = 0.5;
  o.n_steps = 2;
  o.record_every = 1;
  propagate(op, coherent_state(op, 0.0, 0.0, std::sqrt(0.5)), o);
  CHECK(cap.contains("dynamics.coarse_step"));
}
