#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "cavlab/classical.hpp"
#include "cavlab/coupling_model.hpp"
#include "cavlab/hamiltonians.hpp"
#include "cavlab/wave_field.hpp"

namespace cavlab {

enum class PropagationScheme { strang };

struct PropagateOptions {
  double dt = 0.01;
  std::size_t n_steps = 1000;
  std::size_t record_every = 10;
  PropagationScheme scheme = PropagationScheme::strang;
  /// Abort once more than this much probability sits in the edge cells.
  double edge_tolerance = 1e-8;
  /// Edge band width per side; 0 selects max(2, n/32) on each axis.
  std::size_t edge_cells = 0;
  bool cavity_occupation = true;
  /// Writes psi_<t>.bin into snapshot_dir every this many steps (0: never).
  std::size_t snapshot_every = 0;
  std::string snapshot_dir;
  /// Secular energy drift above this emits a dynamics.energy_drift warning.
  double energy_tolerance = 1e-8;
};

struct PropagationRecord {
  std::vector<double> times;
  std::vector<double> norm;
  std::vector<double> energy;
  std::vector<double> x_mean;
  std::vector<double> x2_mean;
  std::vector<double> x_var;
  std::vector<double> survival;
  std::vector<double> cavity_n;  // empty for 1D operators or when disabled
  std::vector<std::string> snapshots;
  /// Largest |norm change| between records divided by the steps between them.
  double norm_drift_per_step = 0.0;
  /// max |E(t) - E(0)| / max(1, |E(0)|) over the records.
  double max_energy_error = 0.0;
  /// Difference of the mean relative energy error between the last and the
  /// first tenth of the records.
  double energy_drift = 0.0;
};

/// Strang splitting exp(-iT dt/2h) exp(-iV dt/h) exp(-iT dt/2h). The kinetic
/// phase uses the full (one- or two-dimensional) momentum symbol of the
/// operator, so cross terms p wp are exact; consecutive half kinetic steps
/// are fused between observation points.
class SplitOperatorPropagator {
 public:
  SplitOperatorPropagator(const GridOperator& op, double dt);
  /// Advances psi by n steps (updates psi.time).
  void advance(WaveField& psi, std::size_t n) const;
  double dt() const { return dt_; }

 private:
  const GridOperator* op_;
  double dt_;
  cvec half_kinetic_, full_kinetic_, potential_phase_;
};

/// Throws InvalidArgument when psi0 is not normalized to 1e-8 and
/// GridSupportError when the edge mass exceeds the tolerance. Warns
/// (dynamics.coarse_step) when dt * E_max / hbar >= 0.5, E_max being the
/// larger of the kinetic and potential ranges on the grid.
PropagationRecord propagate(const GridOperator& op, const WaveField& psi0, const PropagateOptions& opts,
                            WaveField* final_state = nullptr);

void write_csv(const PropagationRecord& rec, std::ostream& os);

/// Product of a matter Gaussian exp(-(x-x0)^2/4 sigma^2 + i p0 x/hbar) and,
/// on two-axis grids, the ground state of the dressed cavity oscillator
/// (mass mu, frequency Omega on q; mass 1/Omega on Q).
WaveField coherent_state(const GridOperator& op, double x0, double p0, double sigma);

/// Ground-state width sqrt(hbar/(2 m w_loc)) of the local harmonic fit of the
/// matter potential at x0 (w_loc from V''(x0); falls back to V'' at the
/// minimum when V''(x0) <= 0).
double local_coherent_width(const PotentialModel& V, double mass, double hbar, double x0);

/// Periodic matter axis that holds a Gaussian packet (x0, p0, sigma) moving
/// in V: the region where V stays below the packet energy plus ten energy
/// spreads, widened by `margin`, with points resolving the largest momentum
/// reachable there.
AxisGrid packet_axis(const PotentialModel& V, double mass, double hbar, double x0, double p0, double sigma,
                     double margin = 1.2);

/// <n> of the cavity factor projected onto dressed-oscillator eigenfunctions.
/// Warns (dynamics.cavity_projection) when the captured weight is below
/// 1 - 1e-8.
struct CavityOccupation {
  double n = 0.0;
  double captured = 0.0;
  std::size_t levels = 0;
};
CavityOccupation reduced_cavity_occupation(const WaveField& psi, const DressedParams& dressed);

struct SpreadRow {
  double time = 0.0;
  double quantum_var = 0.0;
  double classical_var = 0.0;
  double relative = 0.0;
};

struct SpreadComparison {
  std::vector<SpreadRow> rows;
  /// First time with relative difference above the threshold (negative
  /// when it never happens in the compared window).
  double divergence_time = -1.0;
  double threshold = 0.1;
  bool resampled = false;
  /// Estimate of the interpolation error when the classical moments had to
  /// be resampled onto the quantum times.
  double interpolation_error = 0.0;
};

/// Per-time quantum vs classical Var(x). When the time grids differ the
/// classical variance is interpolated (cubic through the four nearest
/// records) onto the quantum times and the difference to linear
/// interpolation is reported as the error estimate.
SpreadComparison spread_comparison(const PropagationRecord& quantum, const TrajectoryEnsembleRecord& classical,
                                   double threshold = 0.1);

void write_csv(const SpreadComparison& cmp, std::ostream& os);

}  // namespace cavlab
