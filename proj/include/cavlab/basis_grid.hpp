#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cavlab/fft.hpp"

namespace cavlab {

/// Which physical coordinate an axis discretizes: matter x, bare cavity
/// coordinate q, or the rescaled cavity coordinate Q.
enum class AxisLabel { matter_x, cavity_q, cavity_Q };

std::string to_string(AxisLabel label);

/// Uniform periodic axis; the point at x_max is excluded.
struct AxisGrid {
  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t n = 8;
  AxisLabel label = AxisLabel::matter_x;

  double length() const { return x_max - x_min; }
  double dx() const { return length() / static_cast<double>(n); }
  double point(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  std::vector<double> points() const;
  /// Angular wavenumbers in FFT storage order, spanning [-pi/dx, pi/dx).
  std::vector<double> wavenumbers() const;

  bool operator==(const AxisGrid&) const = default;
};

/// Validates bounds and size (throws InvalidArgument); warns for transform
/// sizes that are odd or have prime factors above 7.
AxisGrid make_axis(double x_min, double x_max, std::size_t n, AxisLabel label);

/// Matter axis times (optionally) a cavity axis, row-major with the matter
/// index slowest. hbar scales wavenumbers into conjugate momenta.
struct ProductGrid {
  AxisGrid matter;
  std::optional<AxisGrid> cavity;
  double hbar = 1.0;

  std::size_t rank() const { return cavity ? 2 : 1; }
  std::size_t size() const { return matter.n * (cavity ? cavity->n : 1); }
  fft::Shape shape() const;
  const AxisGrid& axis(std::size_t i) const;
  /// Conjugate momenta hbar * k in FFT order.
  std::vector<double> momenta(std::size_t axis) const;
  /// Quadrature weight of one grid cell (dx, or dx * dq).
  double cell_volume() const;

  bool operator==(const ProductGrid&) const = default;
};

ProductGrid build_product_grid(const AxisGrid& matter, const AxisGrid& cavity, double hbar);
ProductGrid build_matter_grid(const AxisGrid& matter, double hbar);

/// Truncated number-basis representation of the cavity mode with
/// q = i sqrt(hbar/2w)(a - a+) and wp = sqrt(hbar w/2)(a + a+).
/// Number state |n> corresponds to i^n times the n-th real Hermite function
/// in the q representation.
struct FockLadder {
  std::size_t n_max = 2;
  double omega = 1.0;
  double hbar = 1.0;
  Eigen::MatrixXcd a, adag, q, wp;
};

FockLadder fock_ladder(std::size_t n_max, double omega, double hbar);

/// n-th eigenfunction of p^2/(2 mass) + mass freq^2 x^2/2 centered at 0,
/// renormalized under the dx quadrature. Warns (grid.tail_mass) when the
/// analytic normalization and the quadrature differ by more than 1e-12.
std::vector<double> ho_eigenfunction_on_grid(std::size_t n, const AxisGrid& axis, double mass,
                                             double freq, double hbar);

/// All eigenfunctions 0..n_max-1 at once (same conventions).
std::vector<std::vector<double>> ho_eigenfunctions_on_grid(std::size_t n_max, const AxisGrid& axis,
                                                           double mass, double freq, double hbar);

}  // namespace cavlab
