#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cavlab/eigensolvers.hpp"
#include "cavlab/errors.hpp"
#include "cavlab/spectra.hpp"

using namespace cavlab;

namespace {

GridOperator op_on(Gauge g, const PhysicalParams& p, const PotentialModel& V, const ProductGrid& grid) {
  HamiltonianSpec s;
  s.gauge = g;
  s.physical = p;
  s.potential = V;
  s.grid = grid;
  return build_operator(s);
}

}  // namespace

TEST_CASE("normal-mode oracle: bare limit and 2x2 reduction") {
  const NormalModeOracle o0 = normal_mode_oracle(PhysicalParams{1, 1, 1, 0}, 2.0);
  CHECK(o0.omega_plus == doctest::Approx(2.0));
  CHECK(o0.omega_minus == doctest::Approx(1.0));
  const NormalModeOracle o = normal_mode_oracle(PhysicalParams{1, 1, 1, 0.3}, 1.0);
  CHECK(o.reduction_mismatch < 1e-12);
  // The product of the normal-mode frequencies does not depend on the
  // coupling: w+ w- = w0 w.
  CHECK(o.omega_plus * o.omega_minus == doctest::Approx(1.0).epsilon(1e-12));
  const auto lv = o.levels(4);
  CHECK(lv[0] == doctest::Approx((o.omega_plus + o.omega_minus) / 2));
}

TEST_CASE("MG and AG spectra reproduce the normal-mode ladder") {
  const PhysicalParams p{1, 1, 1, 0.3};
  const PotentialModel V = PotentialModel::harmonic(1.0);
  const auto ladder = normal_mode_oracle(p, 1.0).levels(10);
  for (Gauge g : {Gauge::MG, Gauge::AG, Gauge::AG_rescaled}) {
    CAPTURE(to_string(g));
    EigenOptions eo;
    eo.k = 10;
    const SpectrumResult r = eigen(op_on(g, p, V, advise_grid(g, p, V, 10)), eo);
    REQUIRE(r.eigenvalues.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(r.eigenvalues[i] / ladder[i] - 1) < 1e-8);
  }
}

TEST_CASE("Davidson matches dense diagonalization") {
  const PhysicalParams p{1, 1, 1, 0.8};
  const PotentialModel V = PotentialModel::double_well(1.0, 1.2);
  const ProductGrid grid = build_product_grid(make_axis(-6, 6, 40, AxisLabel::matter_x),
                                              make_axis(-6, 6, 32, AxisLabel::cavity_q), 1.0);
  const GridOperator H = op_on(Gauge::MG, p, V, grid);
  const EigenSolveResult d = dense_eigensolve(H, 6);
  DavidsonOptions o;
  o.k = 6;
  o.tol = 1e-10;
  const EigenSolveResult k = davidson(H, o);
  REQUIRE(k.converged);
  for (int i = 0; i < 6; ++i) CHECK(k.values[i] == doctest::Approx(d.values[i]).epsilon(1e-10));
}

TEST_CASE("eigenvectors are normalized eigenfunctions") {
  const PhysicalParams p{1, 1, 1, 0.2};
  const PotentialModel V = PotentialModel::morse(4.0, 1.0);
  const GridOperator H = op_on(Gauge::AG, p, V, advise_grid(Gauge::AG, p, V, 3));
  EigenOptions eo;
  eo.k = 3;
  eo.want_vectors = true;
  const SpectrumResult r = eigen(H, eo);
  for (std::size_t i = 0; i < 3; ++i) {
    const WaveField& v = r.eigenvectors[i];
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(H.expectation(v) == doctest::Approx(r.eigenvalues[i]).epsilon(1e-9));
  }
}

TEST_CASE("gauge audit passes with certification") {
  GaugeAuditOptions o;
  o.levels = 8;
  const GaugeAudit a = gauge_audit(PhysicalParams{1, 1, 1, 0.3}, PotentialModel::double_well(2.0, 1.0), o);
  CHECK(a.passed);
  CHECK(a.max_relative_delta < 1e-8);
  CHECK(a.mg.certification.performed);
  CHECK(a.mg.certification.passed);
  CHECK(a.ag.certification.passed);
  CHECK(a.rows.size() == 8);
}

TEST_CASE("certification flags an under-resolved grid") {
  const PhysicalParams p{1, 1, 1, 0.0};
  const PotentialModel V = PotentialModel::harmonic(1.0);
  const ProductGrid coarse = build_product_grid(make_axis(-3, 3, 12, AxisLabel::matter_x),
                                                make_axis(-3, 3, 12, AxisLabel::cavity_q), 1.0);
  EigenOptions eo;
  eo.k = 4;
  const SpectrumResult r =
      certified_eigen([&](const ProductGrid& g) { return op_on(Gauge::MG, p, V, g); }, coarse, eo);
  CHECK(r.certification.performed);
  CHECK_FALSE(r.certification.passed);
}

TEST_CASE("polariton splitting at resonance") {
  const PhysicalParams p{1, 1, 1, 0.05};
  const PotentialModel V = PotentialModel::harmonic(1.0);
  EigenOptions eo;
  eo.k = 4;
  const SpectrumResult r = eigen(op_on(Gauge::MG, p, V, advise_grid(Gauge::MG, p, V, 4)), eo);
  const PolaritonSplitting s = polariton_splitting(r, p, 1.0);
  const NormalModeOracle o = normal_mode_oracle(p, 1.0);
  CHECK_FALSE(s.ambiguous);
  CHECK(s.value == doctest::Approx(o.omega_plus - o.omega_minus).epsilon(1e-7));
}

TEST_CASE("spectrum CSV layout") {
  const PhysicalParams p{1, 1, 1, 0.0};
  const PotentialModel V = PotentialModel::harmonic(1.0);
  EigenOptions eo;
  eo.k = 2;
  const SpectrumResult r = eigen(op_on(Gauge::MG, p, V, advise_grid(Gauge::MG, p, V, 2)), eo);
  std::ostringstream os;
  write_spectrum_csv(os, {r});
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "epsilon,level_index,energy,gauge,residual");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("bad requests throw") {
  const PhysicalParams p{1, 1, 1, 0.0};
  const PotentialModel V = PotentialModel::harmonic(1.0);
  EigenOptions eo;
  eo.k = 0;
  CHECK_THROWS_AS(eigen(op_on(Gauge::MG, p, V, advise_grid(Gauge::MG, p, V, 2)), eo), InvalidArgument);
  CHECK_THROWS_AS(eigen_method_from_string("lanczos"), InvalidArgument);
}
