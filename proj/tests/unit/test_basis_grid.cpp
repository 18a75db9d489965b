#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cavlab/basis_grid.hpp"
#include "cavlab/diagnostics.hpp"
#include "cavlab/errors.hpp"

using namespace cavlab;

TEST_CASE("axis points exclude the right end") {
  const AxisGrid a = make_axis(-2.0, 2.0, 8, AxisLabel::matter_x);
  const auto x = a.points();
  REQUIRE(x.size() == 8);
  CHECK(x.front() == -2.0);
  CHECK(x.back() == doctest::Approx(1.5));
  CHECK(a.dx() == 0.5);
}

TEST_CASE("wavenumbers in FFT order") {
  const AxisGrid a = make_axis(0.0, 2 * std::numbers::pi, 8, AxisLabel::matter_x);
  const auto k = a.wavenumbers();
  const double expect[] = {0, 1, 2, 3, -4, -3, -2, -1};
  for (int i = 0; i < 8; ++i) CHECK(k[i] == doctest::Approx(expect[i]));
}

TEST_CASE("bad axes throw, awkward sizes warn") {
  CHECK_THROWS_AS(make_axis(1.0, 1.0, 8, AxisLabel::matter_x), InvalidArgument);
  CHECK_THROWS_AS(make_axis(0.0, 1.0, 1, AxisLabel::matter_x), InvalidArgument);
  DiagnosticCapture cap;
  make_axis(0.0, 1.0, 22, AxisLabel::matter_x);  // 2 * 11
  CHECK_FALSE(cap.entries().empty());
}

TEST_CASE("product grid layout") {
  const ProductGrid g = build_product_grid(make_axis(-1, 1, 8, AxisLabel::matter_x),
                                           make_axis(-3, 3, 12, AxisLabel::cavity_q), 0.5);
  CHECK(g.rank() == 2);
  CHECK(g.size() == 96);
  CHECK(g.cell_volume() == doctest::Approx(0.25 * 0.5));
  const auto p = g.momenta(1);
  const auto k = g.axis(1).wavenumbers();
  for (std::size_t i = 0; i < k.size(); ++i) CHECK(p[i] == doctest::Approx(0.5 * k[i]));
}

TEST_CASE("oscillator eigenfunctions are orthonormal under the grid quadrature") {
  const AxisGrid a = make_axis(-12, 12, 128, AxisLabel::cavity_q);
  const auto phi = ho_eigenfunctions_on_grid(12, a, 1.3, 0.9, 0.7);
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0;
      for (std::size_t n = 0; n < a.n; ++n) s += phi[i][n] * phi[j][n] * a.dx();
      CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  // Ground state against the closed form.
  const double mw = 1.3 * 0.9 / 0.7;
  for (std::size_t n = 0; n < a.n; ++n) {
    const double x = a.point(n);
    CHECK(phi[0][n] == doctest::Approx(std::pow(mw / std::numbers::pi, 0.25) * std::exp(-mw * x * x / 2)).epsilon(1e-12));
  }
}

TEST_CASE("Fock ladder: [a, a+] = 1 below the truncation and q, wp Hermitian") {
  const FockLadder f = fock_ladder(10, 1.7, 0.6);
  const Eigen::MatrixXcd c = f.a * f.adag - f.adag * f.a;
  for (int i = 0; i < 9; ++i) CHECK(std::abs(c(i, i) - 1.0) < 1e-13);
  CHECK((f.q - f.q.adjoint()).norm() < 1e-13);
  CHECK((f.wp - f.wp.adjoint()).norm() < 1e-13);
  // [q, wp] = i hbar below the truncation.
  const Eigen::MatrixXcd qp = f.q * f.wp - f.wp * f.q;
  for (int i = 0; i < 9; ++i) CHECK(std::abs(qp(i, i) - std::complex<double>(0, 0.6)) < 1e-12);
}
