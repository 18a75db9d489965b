#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cavlab/errors.hpp"
#include "cavlab/tunneling.hpp"

using namespace cavlab;

namespace {
const PotentialModel kWell = PotentialModel::double_well(2.0, 1.0);
}

TEST_CASE("flux splitting agrees with the eigenvalue gap where both resolve") {
  for (double eps : {0.8, 1.5, 2.2}) {
    CAPTURE(eps);
    const TunnelingResult t = tunneling_splitting(semiclassical_operator(PhysicalParams{1, 1, 1, eps}, kWell, 4));
    REQUIRE(t.direct_resolved);
    CHECK(t.splitting == doctest::Approx(t.direct).epsilon(1e-6));
    CHECK(t.odd_energy > t.even_energy);
    CHECK(t.barrier == 2.0);
  }
}

TEST_CASE("splitting falls with coupling beyond the resolution of the gap") {
  double prev = INFINITY;
  for (double eps : {2.0, 4.0, 8.0, 16.0}) {
    const TunnelingResult t = tunneling_splitting(semiclassical_operator(PhysicalParams{1, 1, 1, eps}, kWell, 4));
    CHECK(t.splitting > 0.0);
    CHECK(t.splitting < prev);
    prev = t.splitting;
  }
  CHECK(prev < 1e-20);
}

TEST_CASE("no doublet under the barrier at weak coupling") {
  CHECK_THROWS_AS(tunneling_splitting(semiclassical_operator(PhysicalParams{1, 1, 1, 0.0},
                                                             PotentialModel::double_well(0.3, 1.0), 4)),
                  InvalidArgument);
}

TEST_CASE("parity spectrum interleaves and counts doublets") {
  const GridOperator op = semiclassical_operator(PhysicalParams{1, 1, 1, 3.0}, kWell, 16);
  const ParitySpectrum s = parity_spectrum(op, 8);
  REQUIRE(s.even.size() == 8);
  REQUIRE(s.odd.size() == 8);
  for (int i = 0; i < 7; ++i) {
    CHECK(s.even[i] < s.odd[i]);
    CHECK(s.odd[i] < s.even[i + 1]);
  }
  const std::size_t n = subbarrier_doublets(s, 2.0);
  CHECK(n >= 1);
  CHECK(s.odd[n - 1] < 2.0);
}

TEST_CASE("parity analysis rejects asymmetric input") {
  PhysicalParams p{1, 1, 1, 1.0};
  CHECK_THROWS_AS(parity_spectrum(semiclassical_operator(p, PotentialModel::morse(1, 1), 4), 2), InvalidArgument);
}

TEST_CASE("well area of an oscillator is 2 pi E / omega") {
  const PotentialModel V = PotentialModel::harmonic(1.5, 2.0);
  CHECK(well_area(V, 2.0, 0.9, -5, 5) == doctest::Approx(2 * std::numbers::pi * 0.9 / 1.5).epsilon(1e-8));
}

TEST_CASE("sweep keeps the input order") {
  const auto pts = tunneling_sweep(PhysicalParams{1, 1, 1, 0}, kWell, {3.0, 1.0, 2.0});
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].epsilon == 3.0);
  CHECK(pts[1].epsilon == 1.0);
  CHECK(pts[1].result.splitting > pts[2].result.splitting);
  CHECK(pts[2].result.splitting > pts[0].result.splitting);
}
