#pragma once

#include <string>

namespace cavlab {

/// Bare model inputs: matter mass, cavity frequency, Planck constant and the
/// momentum-gauge coupling. All quantities are in caller-chosen model units.
struct PhysicalParams {
  double m = 1.0;
  double omega = 1.0;
  double hbar = 1.0;
  double epsilon = 0.0;

  bool operator==(const PhysicalParams&) const = default;
};

/// Every coupling-dependent quantity of the single-mode model.
///
/// varsigma   momentum-gauge dimensionless coupling  (eps/omega) sqrt(2/(hbar omega))
/// M          dressed matter mass                    m + 2 eps^2/(hbar omega^3)
/// zeta       acceleration-gauge displacement        eps omega sqrt(2 hbar omega)/(m hbar omega^3 + 2 eps^2)
/// mu         dressed cavity mass                    m/M
/// Omega      dressed cavity frequency               omega/sqrt(mu)
/// xi         displacement in rescaled cavity units  zeta (sqrt(mu) omega)^(-1/2)
/// hbar_eff   effective Planck constant              hbar sqrt(m/M)
/// epsilon_max  coupling that maximizes zeta         sqrt(m hbar omega^3/2)
struct DressedParams {
  double varsigma = 0.0;
  double M = 1.0;
  double zeta = 0.0;
  double mu = 1.0;
  double Omega = 1.0;
  double xi = 0.0;
  double hbar_eff = 1.0;
  double epsilon_max = 0.0;
};

enum class RegimeLabel { weak, crossover, strong };

struct CouplingRegime {
  RegimeLabel label = RegimeLabel::weak;
  double ratio = 0.0;  // 2 eps^2 / (m hbar omega^3)
};

inline constexpr double kWeakRatioThreshold = 0.1;
inline constexpr double kStrongRatioThreshold = 10.0;

/// Throws InvalidArgument unless m, omega, hbar are finite and positive and
/// epsilon is finite and non-negative.
void validate(const PhysicalParams& p);

DressedParams dressed_params(const PhysicalParams& p);
double epsilon_max(const PhysicalParams& p);
CouplingRegime classify_regime(const PhysicalParams& p);

/// Coupling that produces a given ratio 2 eps^2/(m hbar omega^3).
double epsilon_for_ratio(const PhysicalParams& p, double ratio);

/// Emits diagnostics (never throws) when the coupling is far into the regime
/// where a single-mode, unrenormalized description is questionable.
void check_single_mode_validity(const PhysicalParams& p);

std::string to_string(RegimeLabel label);

}  // namespace cavlab
