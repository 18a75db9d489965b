#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cavlab/classical.hpp"
#include "cavlab/errors.hpp"

using namespace cavlab;

namespace {
const ClassicalSystem kOsc = ClassicalSystem::one_d(PotentialModel::harmonic(1.0), 1.0);
const ClassicalSystem kWell = ClassicalSystem::one_d(PotentialModel::double_well(2.0, 1.0), 1.0);
const ClassicalSystem kHH = ClassicalSystem::henon_heiles();
}  // namespace

TEST_CASE("oscillator orbit and energy") {
  const Trajectory t = integrate(kOsc, {1.0, 0.0}, 0.01, 628, 4, 1);
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    CHECK(t.states[i][0] == doctest::Approx(std::cos(t.times[i])).epsilon(1e-8));
    CHECK(t.states[i][1] == doctest::Approx(-std::sin(t.times[i])).epsilon(1e-8));
  }
  CHECK(t.max_energy_error < 1e-9);
}

TEST_CASE("convergence order from step halving") {
  const std::vector<double> x0{0.3, 0.8};
  const auto ref = integrate(kWell, x0, 1e-3, 10000, 6).states.back();
  auto err = [&](int order, double dt) {
    const auto s = integrate(kWell, x0, dt, static_cast<std::size_t>(std::llround(10 / dt)), order).states.back();
    return std::hypot(s[0] - ref[0], s[1] - ref[1]);
  };
  CHECK(std::log2(err(2, 0.02) / err(2, 0.01)) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log2(err(4, 0.04) / err(4, 0.02)) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("time reversibility") {
  const Trajectory f = integrate(kWell, {0.3, 0.8}, 0.01, 5000);
  auto s = f.states.back();
  s[1] = -s[1];
  const auto b = integrate(kWell, s, 0.01, 5000).states.back();
  CHECK(std::abs(b[0] - 0.3) < 1e-10);
  CHECK(std::abs(b[1] + 0.8) < 1e-10);
}

TEST_CASE("tangent map is symplectic") {
  for (int order : {2, 4, 6}) {
    const Eigen::MatrixXd M = monodromy(kHH, state_on_section(kHH, 0.125, 0.1, 0.1), 0.01, 5000, order);
    CHECK(M.rows() == 4);
    CHECK(symplectic_defect(M) < 1e-9);
  }
}

TEST_CASE("tangent map matches finite differences of the flow") {
  const std::vector<double> x0 = state_on_section(kHH, 0.1, 0.05, -0.1);
  const Eigen::MatrixXd M = monodromy(kHH, x0, 0.01, 300);
  const double h = 1e-6;
  for (int j = 0; j < 4; ++j) {
    auto a = x0, b = x0;
    a[j] += h, b[j] -= h;
    const auto fa = integrate(kHH, a, 0.01, 300).states.back(), fb = integrate(kHH, b, 0.01, 300).states.back();
    for (int i = 0; i < 4; ++i) CHECK(M(i, j) == doctest::Approx((fa[i] - fb[i]) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("energy error stays bounded over long runs") {
  const Trajectory t = integrate(kOsc, {1.0, 0.0}, 0.01, 200000);
  CHECK(t.max_energy_error < 1e-9);
  CHECK(t.secular_drift < 1e-10);
}

TEST_CASE("non-finite forces raise a convergence error") {
  const ClassicalSystem steep = ClassicalSystem::one_d(PotentialModel::polynomial({0, 0, 0, 0, 0, 0, 0, 0, 1}), 1.0);
  CHECK_THROWS_AS(integrate(steep, {1e40, 0.0}, 0.1, 10), ConvergenceError);
}

TEST_CASE("section seeds lie on the energy shell") {
  const auto s = state_on_section(kHH, 0.1, 0.2, 0.05);
  CHECK(s[0] == 0.0);
  CHECK(s[2] > 0.0);
  CHECK(kHH.energy(s) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK_THROWS_AS(state_on_section(kHH, 0.1, 0.2, 1.0), InvalidArgument);
  const auto [lo, hi] = section_interval(kHH, 1.0 / 6);
  CHECK(lo < -0.4);
  CHECK(hi > 0.9);
}

TEST_CASE("section crossings land on the plane") {
  SectionOptions o;
  o.crossings = 50;
  const PoincareSection s = poincare_section(kHH, 1.0 / 12, {{0.1, 0.0}, {0.3, 0.0}}, {}, o);
  CHECK(s.points.size() == 100);
  for (const auto& p : s.points) {
    CHECK(p.residual < 1e-12);
    auto st = state_on_section(kHH, 1.0 / 12, p.q, p.p);
    CHECK(kHH.energy(st) == doctest::Approx(1.0 / 12));
  }
}

TEST_CASE("SALI separates a torus from the chaotic sea") {
  SaliOptions o;
  o.t_max = 500;
  // Low-energy orbit near the origin is regular.
  CHECK(sali(kHH, state_on_section(kHH, 1.0 / 24, 0.1, 0.0), o).orbit == OrbitClass::regular);
  // Orbit started near the unstable fixed point at high energy is chaotic.
  const SaliResult c = sali(kHH, state_on_section(kHH, 1.0 / 6, -0.2, 0.2), o);
  CHECK(c.orbit == OrbitClass::chaotic);
  CHECK(c.final_sali < 1e-8);
  // Integrable reference never looks chaotic.
  const ClassicalSystem h2 = ClassicalSystem::harmonic_2d(1.0, std::sqrt(2.0));
  CHECK(sali(h2, state_on_section(h2, 1.0, 0.3, 0.4), o).orbit != OrbitClass::chaotic);
}

TEST_CASE("chaotic fraction grows with energy and is deterministic") {
  FractionOptions o;
  o.sali.t_max = 300;
  o.bootstrap = 200;
  const ChaoticFraction lo = chaotic_fraction(kHH, 1.0 / 12, 24, o);
  const ChaoticFraction hi = chaotic_fraction(kHH, 1.0 / 6, 24, o);
  CHECK(lo.fraction < hi.fraction);
  CHECK(hi.uncertainty > 0.0);
  const ChaoticFraction again = chaotic_fraction(kHH, 1.0 / 6, 24, o);
  CHECK(again.fraction == hi.fraction);
  CHECK(again.seeds == hi.seeds);
}

TEST_CASE("hull area and island counting") {
  const std::vector<std::pair<double, double>> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const auto hull = convex_hull(square);
  CHECK(hull.size() == 4);
  CHECK(polygon_area(hull) == doctest::Approx(1.0));
  // 2D oscillator: the section curve of a seed is the ellipse
  // (wy^2 y^2 + p^2)/2 = E_y with area 2 pi E_y / wy.
  const double wy = std::sqrt(2.0);
  const ClassicalSystem h2 = ClassicalSystem::harmonic_2d(1.0, wy);
  SectionOptions so;
  so.crossings = 200;
  const PoincareSection t = poincare_section(h2, 1.0, {{0.5, 0.0}}, {}, so);
  REQUIRE(t.points.size() == 200);
  const double ey = wy * wy * 0.25 / 2;
  const IslandArea a = island_area(t, {0});
  CHECK(a.area == doctest::Approx(2 * std::numbers::pi * ey / wy).epsilon(5e-3));
  CHECK(a.uncertainty < 5e-3 * a.area);
  const StateCount n = island_state_count(a, 0.1);
  CHECK(n.count == doctest::Approx(a.area / (2 * std::numbers::pi * 0.1)));
}

TEST_CASE("moment-matched Wigner ensemble reproduces the initial moments exactly") {
  EnsembleOptions o;
  o.samples = 500;
  o.n_steps = 10;
  o.record_every = 10;
  const TrajectoryEnsembleRecord r = run_ensemble(kOsc, WignerGaussian{0.5, 0.2, 0.3, 0.7}, o);
  CHECK(r.mean_x[0] == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(r.mean_p[0] == doctest::Approx(0.2).epsilon(1e-13));
  CHECK(r.var_x[0] == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(r.var_p[0] == doctest::Approx(std::pow(0.7 / 0.6, 2)).epsilon(1e-12));
  // Harmonic flow maps the moments in closed form.
  const double t = r.times[1];
  CHECK(r.mean_x[1] == doctest::Approx(0.5 * std::cos(t) + 0.2 * std::sin(t)).epsilon(1e-9));
}
