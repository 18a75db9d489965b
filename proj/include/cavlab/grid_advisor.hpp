#pragma once

#include <cstddef>
#include <vector>

#include "cavlab/basis_grid.hpp"
#include "cavlab/coupling_model.hpp"
#include "cavlab/hamiltonians.hpp"
#include "cavlab/potentials.hpp"

namespace cavlab {

struct AdvisorOptions {
  /// Amplitude (relative to each state's peak) treated as negligible when
  /// measuring supports in position and momentum.
  double tail = 1e-5;
  /// Multiplicative safety factor on extents and momentum ranges.
  double margin = 1.2;
  /// Additional levels resolved beyond the requested count.
  std::size_t extra_levels = 4;
  std::size_t min_points = 16;
  std::size_t max_points = 1024;
};

/// Support of the lowest states of p^2/(2 mass) + V(x): extents in x where
/// any state exceeds `tail` of its peak, the wavenumber range likewise, and
/// the energies.
struct MatterProbe {
  double x_lo = 0.0, x_hi = 0.0;
  double k_max = 0.0;
  std::vector<double> energies;
  std::vector<double> state_x_lo, state_x_hi, state_k_max;
};

MatterProbe probe_matter(const PotentialModel& V, double mass, double hbar, std::size_t count,
                         const AdvisorOptions& opts = {});

/// Support |u| <= u_j of the j-th Hermite function in the dimensionless
/// oscillator coordinate (identical in position and momentum).
double hermite_support(std::size_t j, double tail);

/// Grid for the given gauge resolving the lowest `levels` eigenstates. Uses
/// the decoupled acceleration-gauge picture (dressed matter times dressed
/// cavity oscillator) to size axes, widened by the shear coupling both
/// coordinates. For Gauge::semiclassical returns a matter-only grid with
/// hbar_eff.
ProductGrid advise_grid(Gauge gauge, const PhysicalParams& p, const PotentialModel& V, std::size_t levels,
                        const AdvisorOptions& opts = {});

}  // namespace cavlab
