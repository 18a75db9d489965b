#pragma once

#include <cstddef>
#include <vector>

#include "cavlab/coupling_model.hpp"
#include "cavlab/grid_advisor.hpp"
#include "cavlab/hamiltonians.hpp"
#include "cavlab/potentials.hpp"

namespace cavlab {

/// Lowest levels of a 1D operator on a grid symmetric about x = 0, split by
/// parity. Vectors are quadrature-normalized columns.
struct ParitySpectrum {
  std::vector<double> even, odd;
  Eigen::MatrixXd even_vectors, odd_vectors;
};

/// Requires a 1D operator with an even potential on a grid with
/// x_min = -x_max (throws InvalidArgument otherwise).
ParitySpectrum parity_spectrum(const GridOperator& op, std::size_t k);

struct TunnelingResult {
  /// E_odd - E_even of the lowest doublet from the flux (Wronskian) formula.
  double splitting = 0.0;
  /// Plain eigenvalue difference; only meaningful when direct_resolved.
  double direct = 0.0;
  bool direct_resolved = false;
  double even_energy = 0.0, odd_energy = 0.0;
  double barrier = 0.0;  // V(0)
  double hbar = 0.0;     // effective hbar of the operator
  double matching_point = 0.0;
};

/// Ground tunneling splitting of a symmetric double-well semiclassical
/// operator. psi_e(0) and psi_o'(0) come from integrating the ODE outward
/// from x = 0 and matching to the grid eigenfunctions inside the well, so
/// splittings far below the resolution of E1 - E0 remain accurate. Throws
/// InvalidArgument when the lowest odd level is not below the barrier.
TunnelingResult tunneling_splitting(const GridOperator& op);

/// Number of doublets below V(0): min(#even, #odd) levels under the barrier.
std::size_t subbarrier_doublets(const ParitySpectrum& s, double barrier);

/// Semiclassical operator for (p, V) on an advised symmetric grid.
GridOperator semiclassical_operator(const PhysicalParams& p, const PotentialModel& V, std::size_t levels,
                                    const AdvisorOptions& opts = {});

struct TunnelingPoint {
  double epsilon = 0.0;
  double hbar_eff = 0.0;
  TunnelingResult result;
};

std::vector<TunnelingPoint> tunneling_sweep(const PhysicalParams& base, const PotentialModel& V,
                                            const std::vector<double>& epsilons, const AdvisorOptions& opts = {});

/// Phase-space area enclosed by the contour H = energy of one well of a 1D
/// potential (both wells' union for energies above the barrier). Simpson
/// quadrature between turning points found by bisection.
double well_area(const PotentialModel& V, double mass, double energy, double x_lo, double x_hi);

}  // namespace cavlab
