#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "cavlab/aligned.hpp"
#include "cavlab/basis_grid.hpp"
#include "cavlab/coupling_model.hpp"
#include "cavlab/potentials.hpp"
#include "cavlab/wave_field.hpp"

namespace cavlab {

/// MG          (p + s wp)^2/2m + V(x) + wp^2/2 + w^2 q^2/2          on x*q
/// AG          p^2/2M + V(x + zeta q) + wp^2/2mu + mu Omega^2 q^2/2  on x*q
/// AG_rescaled p^2/2M + V(x + xi Q) + Omega (P^2 + Q^2)/2             on x*Q
/// MG_weak     p^2/2m + wp^2/2 + (s/m) p wp + V(x) + w^2 q^2/2       on x*q
/// AG_weak     p^2/2m + wp^2/2 + V(x) + w^2 q^2/2 + zeta V'(x) q     on x*q
/// semiclassical  -hbar_eff^2/(2m) d^2/dx^2 + V(x)                    on x
enum class Gauge { MG, AG, AG_rescaled, MG_weak, AG_weak, semiclassical };

std::string to_string(Gauge g);
/// Accepts the names printed by to_string (case-sensitive); throws
/// InvalidArgument otherwise.
Gauge gauge_from_string(const std::string& s);

struct HamiltonianSpec {
  Gauge gauge = Gauge::MG;
  PhysicalParams physical;
  PotentialModel potential = PotentialModel::harmonic(1.0);
  ProductGrid grid;
};

inline constexpr std::size_t kDefaultDenseCap = 4096;

/// Separable approximation H0 = Tx(p) + Vx(x) + Tc(c) + Vc(c) used only to
/// precondition iterative solves. It lives in the frame reached from the grid
/// by the row shear psi(x, c) -> psi(x + shear * c, c).
struct SeparableReference {
  rvec tx, vx;  // matter axis: kinetic symbol (FFT order) and potential
  rvec tc, vc;  // cavity axis
  // Full position-diagonal potential in the reference frame (row-major,
  // matter index slow). When present, vx and vc are refined self-consistently.
  rvec frame_potential;
  double shear = 0.0;
};

/// H = F^-1 T(k) F + V(x): a kinetic symbol diagonal in the (one- or
/// two-dimensional) momentum representation plus a position-diagonal
/// potential. The symbol is symmetrized over k -> -k at Nyquist bins so that
/// H is real symmetric as well as Hermitian.
class GridOperator {
 public:
  Gauge gauge = Gauge::MG;
  ProductGrid grid;
  PhysicalParams physical;
  DressedParams dressed;
  rvec kinetic;       // full grid, FFT order
  rvec kinetic_half;  // half-complex layout for real transforms
  rvec potential;     // position grid
  std::size_t dense_cap = kDefaultDenseCap;
  std::optional<SeparableReference> reference;
  /// The matter potential the operator was built from.
  std::optional<PotentialModel> matter_potential;

  std::size_t dimension() const { return potential.size(); }
  fft::Shape shape() const { return grid.shape(); }

  /// out = H in. Reentrant; in and out may not alias.
  void apply(const cplx* in, cplx* out) const;
  WaveField apply(const WaveField& psi) const;
  /// Real-arithmetic variant (H is real symmetric).
  void apply_real(const double* in, double* out) const;
  /// <psi|H|psi> / <psi|psi>.
  double expectation(const WaveField& psi) const;
  /// Kinetic part alone applied to a field.
  void apply_kinetic(const cplx* in, cplx* out) const;

  double kinetic_max() const;
  double potential_min() const;
  double potential_max() const;

  /// Dense real matrix; throws InvalidArgument above dense_cap.
  Eigen::MatrixXd dense() const;
};

GridOperator build_mg(const HamiltonianSpec& spec);
GridOperator build_ag(const HamiltonianSpec& spec);
GridOperator build_ag_rescaled(const HamiltonianSpec& spec);
/// spec.gauge must be MG_weak or AG_weak. Warns outside the weak regime.
GridOperator build_weak_truncation(const HamiltonianSpec& spec);
/// One-dimensional operator; the grid's hbar is replaced by hbar_eff.
GridOperator build_semiclassical(const HamiltonianSpec& spec);
/// Dispatches on spec.gauge.
GridOperator build_operator(const HamiltonianSpec& spec);

enum class MaDirection {
  mg_to_ag,  // psi_AG(x, q) = psi_MG(x + zeta q, q)
  ag_to_mg,  // psi_MG(x, q) = psi_AG(x - zeta q, q)
};

/// Applies the MA unitary as a band-limited shear of each constant-q row.
/// Throws GridSupportError when more than `tolerance` of the probability
/// would be wrapped through the periodic x boundary.
WaveField apply_ma_unitary(const WaveField& psi, const PhysicalParams& p, MaDirection dir,
                           double tolerance = 1e-10);

/// In-place band-limited shear of a real field: out(x, c) = in(x + shift * c, c).
void shear_rows(const ProductGrid& grid, double shift, double* data);

/// Real position-diagonal observable x (or the cavity coordinate) over the grid.
rvec coordinate_array(const ProductGrid& grid, std::size_t axis);

}  // namespace cavlab
