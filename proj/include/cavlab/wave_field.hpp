#pragma once

#include <cstdint>
#include <string>

#include "cavlab/aligned.hpp"
#include "cavlab/basis_grid.hpp"

namespace cavlab {

/// Complex amplitudes over a ProductGrid, row-major with the matter index
/// slowest. Norms and inner products use the cell-volume quadrature.
struct WaveField {
  ProductGrid grid;
  cvec data;
  double time = 0.0;

  WaveField() = default;
  explicit WaveField(ProductGrid g) : grid(std::move(g)), data(grid.size(), cplx(0.0, 0.0)) {}

  std::size_t size() const { return data.size(); }
  double norm2() const;
  double norm() const;
  /// Rescales to unit norm; throws InvalidArgument for a zero field.
  void normalize();
  /// <this|other> under the grid quadrature.
  cplx inner(const WaveField& other) const;
  /// sum_i w_i |psi_i|^2 dV for a real diagonal observable w.
  double expectation(const rvec& w) const;
};

/// Probability density row sums over the cavity axis (marginal in x).
std::vector<double> matter_density(const WaveField& psi);

/// Gaussian wavepacket exp(-(x-x0)^2/(4 sigma^2) + i p0 x / hbar) in one
/// coordinate; normalized on the axis.
cvec gaussian_on_axis(const AxisGrid& axis, double x0, double p0, double sigma, double hbar);

/// Outer product of a matter profile and a cavity profile, normalized.
WaveField product_state(const ProductGrid& grid, const cvec& matter, const cvec& cavity);

/// Fraction of |psi|^2 within `cells` grid points of any edge.
double edge_mass(const WaveField& psi, std::size_t cells);

/// Binary snapshot: magic "CVLBPSI\0", u32 version, u32 rank, u64 n0, u64 n1,
/// f64 dx0, f64 dx1, f64 t, then n0*n1 interleaved (re, im) f64 values,
/// row-major, little-endian host order. For rank 1, n1 = 1 and dx1 = 0.
inline constexpr std::uint32_t kSnapshotVersion = 1;
void write_snapshot(const WaveField& psi, const std::string& path);

struct Snapshot {
  std::uint32_t version = 0;
  std::uint32_t rank = 0;
  std::uint64_t n0 = 0, n1 = 0;
  double dx0 = 0.0, dx1 = 0.0, t = 0.0;
  cvec data;
};
Snapshot read_snapshot(const std::string& path);

}  // namespace cavlab
