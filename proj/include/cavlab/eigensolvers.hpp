#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cavlab/hamiltonians.hpp"

namespace cavlab {

struct DavidsonOptions {
  std::size_t k = 10;
  /// Extra Ritz pairs carried along so clusters at the edge of the wanted
  /// window converge reliably.
  std::size_t guard = 4;
  /// Converged when ||H v - theta v|| <= tol * max(1, |theta|).
  double tol = 1e-8;
  std::size_t max_iterations = 600;
  /// 0 selects max(5 (k + guard), k + guard + 48).
  std::size_t max_subspace = 0;
  std::uint64_t seed = 0x2545F4914F6CDD1DULL;
  /// Optional start vectors (columns); random filtered vectors fill the rest.
  Eigen::MatrixXd initial;
  /// For operators whose separable reference lives in a sheared frame, first
  /// solve the exact frame operator on the same grid and shear its Ritz
  /// vectors back as the start block.
  bool frame_seed = true;
};

struct EigenSolveResult {
  std::vector<double> values;
  Eigen::MatrixXd vectors;  // columns, unit Euclidean norm
  std::vector<double> residuals;
  std::size_t iterations = 0;
  std::size_t matvecs = 0;
  bool converged = false;
};

/// Full dense diagonalization (real symmetric); returns the lowest k pairs.
EigenSolveResult dense_eigensolve(const GridOperator& op, std::size_t k);

/// Block Davidson on the real symmetric operator using only apply_real and a
/// kinetic-symbol preconditioner. Start vectors come from a seeded generator
/// and are smoothed by a few imaginary-time split steps, so results are
/// reproducible. Does not throw on non-convergence; check `converged`.
EigenSolveResult davidson(const GridOperator& op, const DavidsonOptions& opts);

}  // namespace cavlab
