#include "cavlab/basis_grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cavlab/diagnostics.hpp"
#include "cavlab/errors.hpp"

namespace cavlab {

std::string to_string(AxisLabel label) {
  switch (label) {
    case AxisLabel::matter_x: return "x";
    case AxisLabel::cavity_q: return "q";
    case AxisLabel::cavity_Q: return "Q";
  }
  return "?";
}

std::vector<double> AxisGrid::points() const {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = point(i);
  return out;
}

std::vector<double> AxisGrid::wavenumbers() const {
  std::vector<double> k(n);
  const double dk = 2.0 * std::numbers::pi / length();
  const auto nn = static_cast<long>(n);
  for (long j = 0; j < nn; ++j) {
    const long jj = (2 * j < nn) ? j : j - nn;
    k[static_cast<std::size_t>(j)] = dk * static_cast<double>(jj);
  }
  return k;
}

AxisGrid make_axis(double x_min, double x_max, std::size_t n, AxisLabel label) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max)) throw InvalidArgument("axis bounds must be finite");
  if (x_min >= x_max) throw InvalidArgument("axis requires x_min < x_max");
  if (n < 8) {
    std::ostringstream os;
    os << "axis " << to_string(label) << " needs at least 8 points (got " << n << ")";
    throw InvalidArgument(os.str());
  }
  if (n % 2 != 0 || !fft::is_fast_size(n)) {
    std::ostringstream os;
    os << "axis " << to_string(label) << " size " << n
       << " is odd or not 7-smooth; transforms will be slower than necessary";
    warn("grid.slow_fft_size", os.str());
  }
  return AxisGrid{x_min, x_max, n, label};
}

fft::Shape ProductGrid::shape() const {
  if (cavity) return {matter.n, cavity->n};
  return {matter.n};
}

const AxisGrid& ProductGrid::axis(std::size_t i) const {
  if (i == 0) return matter;
  if (i == 1 && cavity) return *cavity;
  throw InvalidArgument("grid axis index out of range");
}

std::vector<double> ProductGrid::momenta(std::size_t i) const {
  auto k = axis(i).wavenumbers();
  for (auto& v : k) v *= hbar;
  return k;
}

double ProductGrid::cell_volume() const { return matter.dx() * (cavity ? cavity->dx() : 1.0); }

ProductGrid build_product_grid(const AxisGrid& matter, const AxisGrid& cavity, double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("grid hbar must be positive");
  if (matter.label != AxisLabel::matter_x) throw InvalidArgument("first axis must be the matter axis");
  if (cavity.label == AxisLabel::matter_x) throw InvalidArgument("second axis must be a cavity axis");
  // Revalidate in case the axes were assembled by hand.
  make_axis(matter.x_min, matter.x_max, matter.n, matter.label);
  make_axis(cavity.x_min, cavity.x_max, cavity.n, cavity.label);
  return ProductGrid{matter, cavity, hbar};
}

ProductGrid build_matter_grid(const AxisGrid& matter, double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("grid hbar must be positive");
  if (matter.label != AxisLabel::matter_x) throw InvalidArgument("matter grid needs a matter axis");
  make_axis(matter.x_min, matter.x_max, matter.n, matter.label);
  return ProductGrid{matter, std::nullopt, hbar};
}

FockLadder fock_ladder(std::size_t n_max, double omega, double hbar) {
  if (n_max < 2) throw InvalidArgument("fock_ladder needs n_max >= 2");
  if (!(omega > 0.0) || !(hbar > 0.0)) throw InvalidArgument("fock_ladder needs omega, hbar > 0");
  const auto n = static_cast<Eigen::Index>(n_max);
  FockLadder f;
  f.n_max = n_max;
  f.omega = omega;
  f.hbar = hbar;
  f.a = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) f.a(k - 1, k) = std::sqrt(static_cast<double>(k));
  f.adag = f.a.adjoint();
  const cplx i(0.0, 1.0);
  f.q = i * std::sqrt(hbar / (2.0 * omega)) * (f.a - f.adag);
  f.wp = std::sqrt(hbar * omega / 2.0) * (f.a + f.adag);
  return f;
}

std::vector<std::vector<double>> ho_eigenfunctions_on_grid(std::size_t n_max, const AxisGrid& axis,
                                                           double mass, double freq, double hbar) {
  if (!(mass > 0.0) || !(freq > 0.0) || !(hbar > 0.0))
    throw InvalidArgument("oscillator eigenfunctions need positive mass, frequency and hbar");
  const double alpha = std::sqrt(mass * freq / hbar);
  const double norm0 = std::pow(alpha * alpha / std::numbers::pi, 0.25);
  const std::size_t npts = axis.n;
  std::vector<std::vector<double>> out(n_max, std::vector<double>(npts, 0.0));
  for (std::size_t i = 0; i < npts; ++i) {
    const double xi = alpha * axis.point(i);
    double prev = 0.0;
    double cur = norm0 * std::exp(-0.5 * xi * xi);
    for (std::size_t k = 0; k < n_max; ++k) {
      out[k][i] = cur;
      const double next = std::sqrt(2.0 / static_cast<double>(k + 1)) * xi * cur -
                          std::sqrt(static_cast<double>(k) / static_cast<double>(k + 1)) * prev;
      prev = cur;
      cur = next;
    }
  }
  const double dx = axis.dx();
  for (std::size_t k = 0; k < n_max; ++k) {
    double s = 0.0;
    for (double v : out[k]) s += v * v;
    s *= dx;
    if (std::abs(1.0 - s) > 1e-12) {
      std::ostringstream os;
      os << "oscillator state n=" << k << " has quadrature norm " << s
         << " on axis " << to_string(axis.label) << " (tail outside grid or under-resolved)";
      warn("grid.tail_mass", os.str());
    }
    const double scale = 1.0 / std::sqrt(s);
    for (double& v : out[k]) v *= scale;
  }
  return out;
}

std::vector<double> ho_eigenfunction_on_grid(std::size_t n, const AxisGrid& axis, double mass,
                                             double freq, double hbar) {
  auto all = ho_eigenfunctions_on_grid(n + 1, axis, mass, freq, hbar);
  return std::move(all.back());
}

}  // namespace cavlab
