#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "cavlab/wave_field.hpp"

namespace cavlab {

/// Rectangular (x, p) mesh, both ends included.
struct PhaseSpaceGrid {
  double x_min = -1.0, x_max = 1.0;
  std::size_t nx = 64;
  double p_min = -1.0, p_max = 1.0;
  std::size_t np = 64;

  double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
  double dp() const { return (p_max - p_min) / static_cast<double>(np - 1); }
  double x(std::size_t i) const { return x_min + dx() * static_cast<double>(i); }
  double p(std::size_t j) const { return p_min + dp() * static_cast<double>(j); }
};

/// Q(x, p) = sum over cavity columns of |<x, p; sigma | psi>|^2 / (2 pi hbar),
/// i.e. the Husimi function of the reduced matter state. Row-major, x slow.
struct HusimiResult {
  PhaseSpaceGrid grid;
  std::vector<double> values;
  double sigma = 0.0;
  double hbar = 0.0;
  /// Trapezoid integral of Q over the mesh (1 when the mesh covers the state).
  double integral = 0.0;

  double at(std::size_t i, std::size_t j) const { return values[i * grid.np + j]; }
};

/// Coherent states exp(-(x-x0)^2/(4 sigma^2) + i p0 x / hbar) normalized on
/// the matter axis. hbar is the Planck constant of the representation
/// (hbar_eff for semiclassical operators).
HusimiResult husimi(const WaveField& psi, const PhaseSpaceGrid& mesh, double hbar, double sigma);

/// Same for a real 1D column (for example an eigenvector).
HusimiResult husimi(const AxisGrid& axis, const std::vector<double>& psi, const PhaseSpaceGrid& mesh, double hbar,
                    double sigma);

/// Trapezoid integral of Q over the mesh cells whose centre lies in the
/// region.
double husimi_mass(const HusimiResult& q, const std::function<bool(double, double)>& region);

/// Mesh spanning the axis in x and +-(hbar * pi / dx) in p.
PhaseSpaceGrid default_phase_space(const AxisGrid& axis, double hbar, std::size_t nx = 128, std::size_t np = 128);

}  // namespace cavlab
