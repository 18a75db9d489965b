#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavlab/potentials.hpp"

namespace cavlab {

/// V = (x^2 + y^2)/2 + lambda (x^2 y - y^3/3). Bound for E < 1/(6 lambda^2).
struct HenonHeiles {
  double lambda = 1.0;
  bool operator==(const HenonHeiles&) const = default;
};

/// V = m (wx^2 x^2 + wy^2 y^2)/2; integrable reference.
struct Harmonic2D {
  double wx = 1.0, wy = 1.0;
  bool operator==(const Harmonic2D&) const = default;
};

/// H = |p|^2/(2 mass) + V(q) in one or two degrees of freedom. State vectors
/// hold (q..., p...).
class ClassicalSystem {
 public:
  static ClassicalSystem one_d(PotentialModel V, double mass);
  static ClassicalSystem henon_heiles(double lambda = 1.0, double mass = 1.0);
  static ClassicalSystem harmonic_2d(double wx, double wy, double mass = 1.0);

  std::size_t dimension() const { return dim_; }
  double mass() const { return mass_; }
  std::string kind() const;

  double potential(const double* q) const;
  /// f = -grad V.
  void force(const double* q, double* f) const;
  /// Hessian of V, row-major dim x dim.
  void hessian(const double* q, double* h) const;
  double energy(const std::vector<double>& state) const;
  /// Smallest energy at which trajectories can leave the well (infinity when
  /// bounded).
  double escape_energy() const;

 private:
  std::size_t dim_ = 1;
  double mass_ = 1.0;
  std::optional<PotentialModel> v1_;
  std::optional<HenonHeiles> hh_;
  std::optional<Harmonic2D> h2_;
};

/// 2: velocity Verlet (leapfrog). 4: Yoshida triple-jump of leapfrog.
/// 6: Yoshida triple-jump of the order-4 map.
void symplectic_step(const ClassicalSystem& sys, std::vector<double>& state, double dt, int order);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  double initial_energy = 0.0;
  /// max |E(t) - E(0)| / |E(0)| over every step.
  double max_energy_error = 0.0;
  /// Secular part: mean relative energy error over the last 1% of steps
  /// minus that over the first 1%.
  double secular_drift = 0.0;
};

/// Symplectic integration for n_steps. States are kept every record_every
/// steps (0 keeps only the endpoints). Non-finite forces throw
/// ConvergenceError with the offending state in the message.
Trajectory integrate(const ClassicalSystem& sys, const std::vector<double>& initial, double dt, std::size_t n_steps,
                     int order = 4, std::size_t record_every = 0);

/// Linearized flow of the same splitting: returns the 2d x 2d Jacobian of
/// the n-step map at `initial` (exactly symplectic up to rounding).
Eigen::MatrixXd monodromy(const ClassicalSystem& sys, const std::vector<double>& initial, double dt,
                          std::size_t n_steps, int order = 4);

/// || M^T J M - J ||_max.
double symplectic_defect(const Eigen::MatrixXd& M);

enum class OrbitClass { regular, chaotic, indeterminate, escaped };
std::string to_string(OrbitClass c);

struct SaliOptions {
  double dt = 0.01;
  double t_max = 1000.0;
  double chaotic_threshold = 1e-8;
  double regular_threshold = 1e-4;
  int order = 4;
};

struct SaliResult {
  OrbitClass orbit = OrbitClass::indeterminate;
  double final_sali = 0.0;
  double min_sali = 0.0;
  double time = 0.0;  // when the classification was reached
};

/// Smaller alignment index of two deviation vectors under the tangent map.
/// Chaotic once SALI < chaotic_threshold; regular if SALI > regular_threshold
/// at t_max; otherwise indeterminate.
SaliResult sali(const ClassicalSystem& sys, const std::vector<double>& initial, const SaliOptions& opts = {});

/// Section plane q[axis] = 0 crossed with p[axis] > 0.
struct SectionSpec {
  std::size_t axis = 0;
};

struct SectionPoint {
  double q = 0.0, p = 0.0;  // the other coordinate and its momentum
  std::size_t seed = 0;
  double residual = 0.0;    // |q[axis]| after the final step onto the plane
};

struct PoincareSection {
  SectionSpec spec;
  double energy = 0.0;
  std::vector<SectionPoint> points;
  std::vector<bool> escaped;  // per seed
};

struct SectionOptions {
  double dt = 0.01;
  std::size_t crossings = 300;  // per seed
  std::size_t max_steps = 2000000;
  int order = 4;
};

/// Full 2D states on the energy shell at the plane: seeds given as (q, p) of
/// the remaining coordinate, p[axis] > 0 fixed by the energy. Throws
/// InvalidArgument when a seed lies outside the accessible region.
std::vector<double> state_on_section(const ClassicalSystem& sys, double energy, double q, double p,
                                     const SectionSpec& spec = {});

/// Accessible interval of the free coordinate on the plane at this energy
/// (the connected piece around the origin where V <= E).
std::pair<double, double> section_interval(const ClassicalSystem& sys, double energy, const SectionSpec& spec = {});

/// Crossings located with Henon's trick: once q[axis] changes sign, one RK4
/// step with q[axis] as the independent variable lands exactly on the plane.
PoincareSection poincare_section(const ClassicalSystem& sys, double energy,
                                 const std::vector<std::pair<double, double>>& seeds, const SectionSpec& spec = {},
                                 const SectionOptions& opts = {});

struct ChaoticFraction {
  double fraction = 0.0;
  double uncertainty = 0.0;  // bootstrap standard deviation
  std::size_t chaotic = 0, regular = 0, indeterminate = 0, escaped = 0;
  std::vector<std::pair<double, double>> seeds;
  std::vector<OrbitClass> classes;
};

struct FractionOptions {
  SaliOptions sali;
  SectionSpec section;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0x2545F4914F6CDD1DULL;
};

/// Seeds uniform over the accessible part of the section plane at this
/// energy (rejection sampling); fraction = chaotic / (chaotic + regular),
/// indeterminate and escaped seeds excluded and reported.
ChaoticFraction chaotic_fraction(const ClassicalSystem& sys, double energy, std::size_t n_seeds,
                                 const FractionOptions& opts = {});

struct IslandArea {
  double area = 0.0;
  double uncertainty = 0.0;
  double max_angular_gap = 0.0;  // radians, around the centroid
};

/// Convex-hull area of the selected seeds' section points. The uncertainty
/// is the hull difference between all points and every other point. Throws
/// InvalidArgument when the points do not close around their centroid
/// (largest angular gap above max_gap).
IslandArea island_area(const PoincareSection& s, const std::vector<std::size_t>& seeds, double max_gap = 0.5);

struct StateCount {
  double count = 0.0;
  double uncertainty = 0.0;
};

/// area / (2 pi hbar_eff), uncertainty propagated from the area.
StateCount island_state_count(const IslandArea& a, double hbar_eff);
StateCount island_state_count(const PoincareSection& s, const std::vector<std::size_t>& seeds, double hbar_eff);

/// Convex hull (counter-clockwise) and its shoelace area.
std::vector<std::pair<double, double>> convex_hull(std::vector<std::pair<double, double>> pts);
double polygon_area(const std::vector<std::pair<double, double>>& poly);

/// Gaussian phase-space ensemble with the Wigner function of a 1D coherent
/// state: x ~ N(x0, sigma^2), p ~ N(p0, (hbar/(2 sigma))^2).
struct WignerGaussian {
  double x0 = 0.0, p0 = 0.0, sigma = 1.0, hbar = 1.0;
};

struct EnsembleOptions {
  std::size_t samples = 10000;
  double dt = 0.005;
  std::size_t n_steps = 1000;
  std::size_t record_every = 10;
  int order = 4;
  std::uint64_t seed = 0x2545F4914F6CDD1DULL;
  /// Per-trajectory relative energy drift above this is counted.
  double energy_tolerance = 1e-8;
  /// Affinely standardize the drawn sample to the exact mean and covariance
  /// of the Wigner Gaussian, which removes the O(1/sqrt(N)) bias of the
  /// initial second moments.
  bool moment_matched = true;
};

struct TrajectoryEnsembleRecord {
  std::string sampling;  // description of the initial distribution
  std::vector<double> times;
  std::vector<double> mean_x, var_x, mean_p, var_p;
  std::size_t samples = 0;
  double max_energy_drift = 0.0;  // worst per-trajectory secular drift
  std::size_t drift_violations = 0;
};

/// 1D ensemble; moments accumulated in sample order (deterministic).
TrajectoryEnsembleRecord run_ensemble(const ClassicalSystem& sys, const WignerGaussian& init,
                                      const EnsembleOptions& opts = {});

}  // namespace cavlab
