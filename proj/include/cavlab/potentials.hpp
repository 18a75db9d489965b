#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cavlab/aligned.hpp"
#include "cavlab/basis_grid.hpp"

namespace cavlab {

/// V = mass omega0^2 x^2 / 2
struct Harmonic {
  double omega0 = 1.0;
  double mass = 1.0;
  bool operator==(const Harmonic&) const = default;
};

/// V = barrier (x^2 - a^2)^2 / a^4: minima at +-a, V(0) = barrier.
struct QuarticDoubleWell {
  double barrier = 1.0;
  double a = 1.0;
  bool operator==(const QuarticDoubleWell&) const = default;
};

/// V = depth (1 - exp(-alpha (x - x_e)))^2
struct Morse {
  double depth = 1.0;
  double alpha = 1.0;
  double x_e = 0.0;
  bool operator==(const Morse&) const = default;
};

/// V = sum_k c_k x^k
struct Polynomial {
  std::vector<double> coefficients;
  bool operator==(const Polynomial&) const = default;
};

/// One-dimensional matter potential. Immutable after construction.
class PotentialModel {
 public:
  using Variant = std::variant<Harmonic, QuarticDoubleWell, Morse, Polynomial>;

  /// Validates the parameters of the chosen kind (throws InvalidArgument).
  explicit PotentialModel(Variant v);

  static PotentialModel harmonic(double omega0, double mass = 1.0) { return PotentialModel(Harmonic{omega0, mass}); }
  static PotentialModel double_well(double barrier, double a) {
    return PotentialModel(QuarticDoubleWell{barrier, a});
  }
  static PotentialModel morse(double depth, double alpha, double x_e = 0.0) {
    return PotentialModel(Morse{depth, alpha, x_e});
  }
  static PotentialModel polynomial(std::vector<double> c) { return PotentialModel(Polynomial{std::move(c)}); }

  double eval(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  /// Symmetric under x -> -x.
  bool is_even() const;
  /// Location of the global minimum (for the polynomial kind: found on a
  /// scan of [-10, 10] and polished with Newton steps).
  double argmin() const;
  /// Energy above which states are unbound: +inf for confining potentials,
  /// the dissociation energy for Morse, -inf when V is unbounded below.
  double continuum_threshold() const;
  std::string kind() const;
  const Variant& variant() const { return v_; }

  bool operator==(const PotentialModel&) const = default;

 private:
  Variant v_;
};

/// Entry (i, j) = V(x_i + zeta_eff * c_j) with c the cavity coordinate (q or
/// Q). On a matter-only grid returns V(x_i).
rvec displaced_on_grid(const PotentialModel& model, const ProductGrid& grid, double zeta_eff);

}  // namespace cavlab
