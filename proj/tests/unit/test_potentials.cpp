#include <doctest.h>

#include <cmath>

#include "cavlab/errors.hpp"
#include "cavlab/potentials.hpp"

using namespace cavlab;

namespace {
double fd1(const PotentialModel& V, double x, double h = 1e-5) { return (V.eval(x + h) - V.eval(x - h)) / (2 * h); }
double fd2(const PotentialModel& V, double x, double h = 1e-4) {
  return (V.eval(x + h) - 2 * V.eval(x) + V.eval(x - h)) / (h * h);
}
}  // namespace

TEST_CASE("derivatives agree with finite differences") {
  const PotentialModel models[] = {PotentialModel::harmonic(1.3, 0.7), PotentialModel::double_well(2.0, 1.0),
                                   PotentialModel::morse(3.0, 0.8, 0.4),
                                   PotentialModel::polynomial({0.5, -1.0, 0.0, 0.3, 0.2})};
  for (const auto& V : models)
    for (double x : {-1.3, -0.2, 0.0, 0.7, 1.9}) {
      CHECK(V.derivative(x) == doctest::Approx(fd1(V, x)).epsilon(1e-8));
      CHECK(V.second_derivative(x) == doctest::Approx(fd2(V, x)).epsilon(1e-5));
    }
}

TEST_CASE("closed-form values") {
  CHECK(PotentialModel::double_well(2.0, 1.0).eval(0.0) == 2.0);
  CHECK(PotentialModel::double_well(2.0, 1.5).eval(1.5) == 0.0);
  CHECK(PotentialModel::morse(3.0, 0.8, 0.4).eval(0.4) == 0.0);
  CHECK(PotentialModel::harmonic(2.0, 0.5).eval(1.0) == doctest::Approx(1.0));
  CHECK(PotentialModel::polynomial({1, 2, 3}).eval(2.0) == doctest::Approx(17.0));
}

TEST_CASE("parity and minima") {
  CHECK(PotentialModel::harmonic(1.0).is_even());
  CHECK(PotentialModel::double_well(1.0, 2.0).is_even());
  CHECK_FALSE(PotentialModel::morse(1.0, 1.0).is_even());
  CHECK(PotentialModel::polynomial({0, 0, 0, 0, 1}).is_even());
  CHECK_FALSE(PotentialModel::polynomial({0, 0.1, 1}).is_even());
  CHECK(std::abs(PotentialModel::double_well(1.0, 2.0).argmin()) == doctest::Approx(2.0));
  CHECK(PotentialModel::morse(1.0, 1.0, 0.3).argmin() == doctest::Approx(0.3));
  // x^4 - x^2: minima at +-1/sqrt 2.
  CHECK(std::abs(PotentialModel::polynomial({0, 0, -1, 0, 1}).argmin()) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
}

TEST_CASE("invalid parameters throw") {
  CHECK_THROWS_AS(PotentialModel::harmonic(0.0), InvalidArgument);
  CHECK_THROWS_AS(PotentialModel::double_well(-1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(PotentialModel::morse(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(PotentialModel::polynomial({}), InvalidArgument);
}

TEST_CASE("displaced potential on a product grid") {
  const ProductGrid g = build_product_grid(make_axis(-2, 2, 8, AxisLabel::matter_x),
                                           make_axis(-1, 1, 8, AxisLabel::cavity_q), 1.0);
  const PotentialModel V = PotentialModel::double_well(1.0, 1.0);
  const rvec d = displaced_on_grid(V, g, 0.3);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      CHECK(d[i * 8 + j] == doctest::Approx(V.eval(g.matter.point(i) + 0.3 * g.cavity->point(j))));
}
