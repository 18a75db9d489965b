#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cavlab/dynamics.hpp"
#include "cavlab/husimi.hpp"
#include "cavlab/spectra.hpp"

using namespace cavlab;

namespace {

GridOperator line(double hbar = 1.0) {
  HamiltonianSpec s;
  s.gauge = Gauge::semiclassical;
  s.physical = PhysicalParams{1, 1, hbar, 0};
  s.potential = PotentialModel::harmonic(1.0);
  s.grid = build_matter_grid(make_axis(-8, 8, 128, AxisLabel::matter_x), hbar);
  return build_operator(s);
}

}  // namespace

TEST_CASE("coherent state: closed-form Husimi") {
  const GridOperator op = line();
  const double s = std::sqrt(0.5);
  const WaveField psi = coherent_state(op, 1.0, -0.5, s);
  PhaseSpaceGrid m{-6, 8, 141, -7, 6, 131};
  const HusimiResult q = husimi(psi, m, 1.0, s);
  CHECK(q.integral == doctest::Approx(1.0).epsilon(1e-8));
  // |<a|b>|^2 for equal widths: exp(-dx^2/(4 s^2) - s^2 dp^2 / hbar^2).
  for (std::size_t i = 0; i < m.nx; i += 10)
    for (std::size_t j = 0; j < m.np; j += 10) {
      const double dx = m.x(i) - 1.0, dp = m.p(j) + 0.5;
      const double expect = std::exp(-dx * dx / (4 * s * s) - dp * dp * s * s) / (2 * std::numbers::pi);
      CHECK(q.at(i, j) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("eigenstate Husimi is non-negative and normalized") {
  const GridOperator op = line(0.3);
  EigenOptions eo;
  eo.k = 4;
  eo.want_vectors = true;
  const SpectrumResult r = eigen(op, eo);
  const HusimiResult q = husimi(r.eigenvectors[3], default_phase_space(op.grid.matter, 0.3, 96, 96), 0.3,
                                local_coherent_width(PotentialModel::harmonic(1.0), 1.0, 0.3, 0.0));
  CHECK(*std::min_element(q.values.begin(), q.values.end()) >= 0.0);
  CHECK(q.integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("real-column overload matches the field overload") {
  const GridOperator op = line();
  const WaveField psi = coherent_state(op, 0.3, 0.0, 0.8);
  std::vector<double> col(psi.size());
  for (std::size_t i = 0; i < col.size(); ++i) col[i] = psi.data[i].real();
  PhaseSpaceGrid m{-3, 3, 21, -3, 3, 21};
  const HusimiResult a = husimi(psi, m, 1.0, 0.8), b = husimi(op.grid.matter, col, m, 1.0, 0.8);
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
}

TEST_CASE("region mass") {
  const GridOperator op = line();
  const HusimiResult q =
      husimi(coherent_state(op, 0.0, 0.0, std::sqrt(0.5)), PhaseSpaceGrid{-5, 5, 101, -5, 5, 101}, 1.0, std::sqrt(0.5));
  const double right = husimi_mass(q, [](double x, double) { return x > 0; });
  const double all = husimi_mass(q, [](double, double) { return true; });
  CHECK(all == doctest::Approx(q.integral).epsilon(1e-12));
  CHECK(right == doctest::Approx(0.5 * all).epsilon(2e-2));
}
