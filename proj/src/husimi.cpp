#include "cavlab/husimi.hpp"

#include <cmath>
#include <numbers>

#include "cavlab/errors.hpp"

namespace cavlab {

namespace {

void check_mesh(const PhaseSpaceGrid& m) {
  if (m.nx < 2 || m.np < 2 || !(m.x_max > m.x_min) || !(m.p_max > m.p_min))
    throw InvalidArgument("phase-space mesh needs at least 2x2 points and increasing bounds");
}

double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

// columns[c] holds the matter profile of cavity column c.
HusimiResult husimi_columns(const AxisGrid& axis, const std::vector<std::vector<cplx>>& columns, double dc,
                            const PhaseSpaceGrid& mesh, double hbar, double sigma) {
  check_mesh(mesh);
  if (!(hbar > 0.0) || !(sigma > 0.0)) throw InvalidArgument("husimi needs hbar, sigma > 0");
  const std::size_t n = axis.n;
  const double dx = axis.dx();
  std::vector<double> xs(n);
  for (std::size_t j = 0; j < n; ++j) xs[j] = axis.point(j);
  // exp(-i p x / hbar) for every mesh momentum and grid point.
  std::vector<cplx> ph(mesh.np * n);
  for (std::size_t b = 0; b < mesh.np; ++b)
    for (std::size_t j = 0; j < n; ++j) ph[b * n + j] = std::polar(1.0, -mesh.p(b) * xs[j] / hbar);
  const double gnorm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  const double cut = 10.0 * sigma;

  HusimiResult out;
  out.grid = mesh;
  out.sigma = sigma;
  out.hbar = hbar;
  out.values.assign(mesh.nx * mesh.np, 0.0);
  std::vector<cplx> f(n);
  for (std::size_t a = 0; a < mesh.nx; ++a) {
    const double x0 = mesh.x(a);
    std::size_t lo = n, hi = 0;
    std::vector<double> g(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = xs[j] - x0;
      if (std::abs(d) > cut) continue;
      g[j] = gnorm * std::exp(-d * d / (4.0 * sigma * sigma)) * dx;
      lo = std::min(lo, j);
      hi = std::max(hi, j + 1);
    }
    if (lo >= hi) continue;
    for (const auto& col : columns) {
      for (std::size_t j = lo; j < hi; ++j) f[j] = g[j] * col[j];
      for (std::size_t b = 0; b < mesh.np; ++b) {
        cplx s(0.0, 0.0);
        const cplx* e = ph.data() + b * n;
        // The coherent state carries exp(+i p x / hbar), so its conjugate
        // multiplies psi by exp(-i p x / hbar).
        for (std::size_t j = lo; j < hi; ++j) s += e[j] * f[j];
        out.values[a * mesh.np + b] += std::norm(s) * dc;
      }
    }
  }
  const double inv = 1.0 / (2.0 * std::numbers::pi * hbar);
  double total = 0.0;
  for (std::size_t a = 0; a < mesh.nx; ++a)
    for (std::size_t b = 0; b < mesh.np; ++b) {
      double& v = out.values[a * mesh.np + b];
      v *= inv;
      total += trapezoid_weight(a, mesh.nx) * trapezoid_weight(b, mesh.np) * v;
    }
  out.integral = total * mesh.dx() * mesh.dp();
  return out;
}

}  // namespace

HusimiResult husimi(const WaveField& psi, const PhaseSpaceGrid& mesh, double hbar, double sigma) {
  const std::size_t n0 = psi.grid.matter.n, n1 = psi.grid.cavity ? psi.grid.cavity->n : 1;
  const double dc = psi.grid.cavity ? psi.grid.cavity->dx() : 1.0;
  std::vector<std::vector<cplx>> cols(n1, std::vector<cplx>(n0));
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t c = 0; c < n1; ++c) cols[c][i] = psi.data[i * n1 + c];
  return husimi_columns(psi.grid.matter, cols, dc, mesh, hbar, sigma);
}

HusimiResult husimi(const AxisGrid& axis, const std::vector<double>& psi, const PhaseSpaceGrid& mesh, double hbar,
                    double sigma) {
  if (psi.size() != axis.n) throw InvalidArgument("husimi: vector size does not match the axis");
  std::vector<std::vector<cplx>> cols(1, std::vector<cplx>(psi.begin(), psi.end()));
  return husimi_columns(axis, cols, 1.0, mesh, hbar, sigma);
}

double husimi_mass(const HusimiResult& q, const std::function<bool(double, double)>& region) {
  const auto& m = q.grid;
  double s = 0.0;
  for (std::size_t a = 0; a < m.nx; ++a)
    for (std::size_t b = 0; b < m.np; ++b)
      if (region(m.x(a), m.p(b))) s += trapezoid_weight(a, m.nx) * trapezoid_weight(b, m.np) * q.at(a, b);
  return s * m.dx() * m.dp();
}

PhaseSpaceGrid default_phase_space(const AxisGrid& axis, double hbar, std::size_t nx, std::size_t np) {
  PhaseSpaceGrid g;
  g.x_min = axis.x_min;
  g.x_max = axis.x_max;
  g.nx = nx;
  const double pm = hbar * std::numbers::pi / axis.dx();
  g.p_min = -pm;
  g.p_max = pm;
  g.np = np;
  return g;
}

}  // namespace cavlab
