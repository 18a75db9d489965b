#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cavlab/eigensolvers.hpp"
#include "cavlab/grid_advisor.hpp"
#include "cavlab/hamiltonians.hpp"
#include "cavlab/wave_field.hpp"

namespace cavlab {

enum class EigenMethod { automatic, dense, krylov };
std::string to_string(EigenMethod m);
EigenMethod eigen_method_from_string(const std::string& s);

struct EigenOptions {
  std::size_t k = 10;
  EigenMethod method = EigenMethod::automatic;
  bool want_vectors = false;
  std::uint64_t seed = 0x2545F4914F6CDD1DULL;
  double tol = 1e-8;
  std::size_t max_iterations = 600;
  /// automatic picks dense at or below this dimension.
  std::size_t dense_threshold = 1200;
};

/// Result of re-solving on a refined grid.
struct Certification {
  bool performed = false;
  bool passed = false;
  double tolerance = 0.0;
  double max_relative_change = 0.0;
  ProductGrid refined_grid;
  std::string protocol;
};

struct SpectrumResult {
  std::vector<double> eigenvalues;          // ascending
  std::vector<WaveField> eigenvectors;      // quadrature-normalized, optional
  EigenMethod method = EigenMethod::dense;  // never automatic
  std::vector<double> residual_norms;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t matvecs = 0;
  Gauge gauge = Gauge::MG;
  double epsilon = 0.0;
  ProductGrid grid;
  Certification certification;
};

/// Lowest k eigenpairs. Throws ConvergenceError (with the best residuals in
/// the message) if the iterative path does not converge.
SpectrumResult eigen(const GridOperator& op, const EigenOptions& opts);

struct CertificationOptions {
  double tolerance = 1e-9;
  /// Refined grid: every axis extent times extent_factor and point count
  /// times points_factor (rounded up to an even 7-smooth size).
  double extent_factor = 1.25;
  double points_factor = 1.5;
};

ProductGrid refine_grid(const ProductGrid& g, const CertificationOptions& c);

using OperatorFactory = std::function<GridOperator(const ProductGrid&)>;

/// Solves on `grid`, re-solves on refine_grid(grid) and records the largest
/// relative eigenvalue change. The base-grid result is returned.
SpectrumResult certified_eigen(const OperatorFactory& make, const ProductGrid& grid, const EigenOptions& opts,
                               const CertificationOptions& cert = {});

/// Exact normal modes of the MG Hamiltonian with V = m omega0^2 x^2/2:
/// H = z^T A z / 2 with z = (x, q, p, wp), A = diag(U, K),
/// U = diag(m omega0^2, omega^2), K = [[1/m, s/m], [s/m, s^2/m + 1]].
struct NormalModeOracle {
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double hbar = 1.0;
  /// Same frequencies from the eigenvalues of K U (2x2 reduction); the
  /// relative difference to the 4x4 flow result.
  double reduction_mismatch = 0.0;

  /// Ascending hbar w+ (n + 1/2) + hbar w- (k + 1/2), first `count` values.
  std::vector<double> levels(std::size_t count) const;
};

NormalModeOracle normal_mode_oracle(const PhysicalParams& p, double omega0);

struct PolaritonSplitting {
  double value = 0.0;
  /// The third level is not the upper one-quantum polariton (a two-quantum
  /// state of the lower mode lies below it), so E2 - E1 is not the splitting.
  bool ambiguous = false;
  /// E2 - E1 is below the numerical resolution of the levels.
  bool degenerate = false;
  std::string note;
};

PolaritonSplitting polariton_splitting(const SpectrumResult& r, const PhysicalParams& p, double omega0);

struct GaugeAuditRow {
  std::size_t level = 0;
  double mg = 0.0, ag = 0.0, relative_delta = 0.0;
};

struct GaugeAudit {
  PhysicalParams physical;
  std::vector<GaugeAuditRow> rows;
  double max_relative_delta = 0.0;
  double tolerance = 1e-8;
  bool passed = false;
  SpectrumResult mg, ag;
};

struct GaugeAuditOptions {
  std::size_t levels = 20;
  double tolerance = 1e-8;
  bool certify = true;
  EigenOptions eigen;
  AdvisorOptions advisor;
  CertificationOptions certification;
};

/// Sorted-order comparison of the lowest MG and AG eigenvalues, each on its
/// own advised grid (and certified when requested).
GaugeAudit gauge_audit(const PhysicalParams& p, const PotentialModel& V, const GaugeAuditOptions& opts = {});

/// CSV with header epsilon,level_index,energy,gauge,residual.
void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumResult>& results);

}  // namespace cavlab
