#include "cavlab/coupling_model.hpp"

#include <cmath>
#include <sstream>

#include "cavlab/diagnostics.hpp"
#include "cavlab/errors.hpp"

namespace cavlab {

namespace {
void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    std::ostringstream os;
    os << name << " must be finite and positive (got " << v << ")";
    throw InvalidArgument(os.str());
  }
}
}  // namespace

void validate(const PhysicalParams& p) {
  require_positive(p.m, "m");
  require_positive(p.omega, "omega");
  require_positive(p.hbar, "hbar");
  if (!std::isfinite(p.epsilon) || p.epsilon < 0.0) {
    std::ostringstream os;
    os << "epsilon must be finite and non-negative (got " << p.epsilon << ")";
    throw InvalidArgument(os.str());
  }
}

DressedParams dressed_params(const PhysicalParams& p) {
  validate(p);
  const double w3 = p.omega * p.omega * p.omega;
  const double hw3 = p.hbar * w3;
  const double eps2 = p.epsilon * p.epsilon;
  const double denom = p.m * hw3 + 2.0 * eps2;

  DressedParams d;
  d.varsigma = (p.epsilon / p.omega) * std::sqrt(2.0 / (p.hbar * p.omega));
  d.M = denom / hw3;
  d.zeta = p.epsilon * p.omega * std::sqrt(2.0 * p.hbar * p.omega) / denom;
  // mu = m/M is evaluated in this form so that mu * M == m to rounding.
  d.mu = p.m / d.M;
  d.Omega = p.omega / std::sqrt(d.mu);
  d.xi = d.zeta / std::sqrt(std::sqrt(d.mu) * p.omega);
  d.hbar_eff = p.hbar * std::sqrt(p.m / d.M);
  d.epsilon_max = std::sqrt(0.5 * p.m * hw3);
  return d;
}

double epsilon_max(const PhysicalParams& p) {
  validate(p);
  return std::sqrt(0.5 * p.m * p.hbar * p.omega * p.omega * p.omega);
}

CouplingRegime classify_regime(const PhysicalParams& p) {
  validate(p);
  CouplingRegime r;
  r.ratio = 2.0 * p.epsilon * p.epsilon / (p.m * p.hbar * p.omega * p.omega * p.omega);
  if (r.ratio < kWeakRatioThreshold) {
    r.label = RegimeLabel::weak;
  } else if (r.ratio > kStrongRatioThreshold) {
    r.label = RegimeLabel::strong;
  } else {
    r.label = RegimeLabel::crossover;
  }
  return r;
}

double epsilon_for_ratio(const PhysicalParams& p, double ratio) {
  validate(p);
  if (!std::isfinite(ratio) || ratio < 0.0) throw InvalidArgument("ratio must be finite and >= 0");
  return std::sqrt(0.5 * ratio * p.m * p.hbar * p.omega * p.omega * p.omega);
}

void check_single_mode_validity(const PhysicalParams& p) {
  const auto regime = classify_regime(p);
  // The single-mode model ignores mass renormalization from the other cavity
  // modes; beyond ~1e6 the dressed mass is dominated by the field and results
  // should be read as properties of the model only.
  if (regime.ratio > 1e6) {
    std::ostringstream os;
    os << "coupling ratio 2eps^2/(m hbar omega^3) = " << regime.ratio
       << " is far beyond the strong-coupling threshold; the single-mode model is used as given";
    warn("coupling.extreme", os.str());
  }
}

std::string to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::weak: return "weak";
    case RegimeLabel::crossover: return "crossover";
    case RegimeLabel::strong: return "strong";
  }
  return "unknown";
}

}  // namespace cavlab
