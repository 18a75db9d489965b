#include "cavlab/tunneling.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "cavlab/errors.hpp"

namespace cavlab {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

void require_symmetric(const GridOperator& op) {
  if (op.grid.rank() != 1) throw InvalidArgument("parity analysis needs a one-dimensional operator");
  const auto& ax = op.grid.matter;
  if (ax.n % 2 != 0) throw InvalidArgument("parity analysis needs an even number of grid points");
  if (std::abs(ax.x_min + ax.x_max) > 1e-12 * ax.length())
    throw InvalidArgument("parity analysis needs a grid symmetric about x = 0");
  const std::size_t n = ax.n;
  for (std::size_t j = 1; j < n / 2; ++j)
    if (std::abs(op.potential[j] - op.potential[n - j]) > 1e-10 * (1.0 + std::abs(op.potential[j])))
      throw InvalidArgument("parity analysis needs an even potential");
}

// Columns of the even (sign = +1) or odd (sign = -1) projector basis under
// the reflection j -> n - j (mod n).
MatrixXd parity_basis(std::size_t n, int sign) {
  const std::size_t h = n / 2;
  const double r = 1.0 / std::sqrt(2.0);
  MatrixXd B = MatrixXd::Zero(static_cast<Index>(n), static_cast<Index>(sign > 0 ? h + 1 : h - 1));
  Index c = 0;
  if (sign > 0) B(0, c++) = 1.0;
  for (std::size_t j = 1; j < h; ++j) {
    B(static_cast<Index>(j), c) = r;
    B(static_cast<Index>(n - j), c) = sign * r;
    ++c;
  }
  if (sign > 0) B(static_cast<Index>(h), c++) = 1.0;
  return B;
}

// Integrates u'' = g(x) u from 0 to x_end with RK4; returns u(x_end).
template <class G>
double shoot(G g, double u0, double du0, double x_end, std::size_t steps) {
  double u = u0, v = du0, x = 0.0;
  const double h = x_end / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const double k1u = v, k1v = g(x) * u;
    const double k2u = v + 0.5 * h * k1v, k2v = g(x + 0.5 * h) * (u + 0.5 * h * k1u);
    const double k3u = v + 0.5 * h * k2v, k3v = g(x + 0.5 * h) * (u + 0.5 * h * k2u);
    const double k4u = v + h * k3v, k4v = g(x + h) * (u + h * k3u);
    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    x += h;
  }
  return u;
}

}  // namespace

ParitySpectrum parity_spectrum(const GridOperator& op, std::size_t k) {
  require_symmetric(op);
  if (k == 0) throw InvalidArgument("parity_spectrum needs k >= 1");
  const std::size_t n = op.grid.matter.n;
  const MatrixXd H = op.dense();
  const double s = 1.0 / std::sqrt(op.grid.matter.dx());
  ParitySpectrum out;
  for (int sign : {+1, -1}) {
    const MatrixXd B = parity_basis(n, sign);
    const MatrixXd Hs = B.transpose() * H * B;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (Hs + Hs.transpose()));
    const Index kk = std::min<Index>(static_cast<Index>(k), Hs.rows());
    std::vector<double> vals(es.eigenvalues().data(), es.eigenvalues().data() + kk);
    MatrixXd vecs = B * es.eigenvectors().leftCols(kk) * s;
    if (sign > 0) {
      out.even = std::move(vals);
      out.even_vectors = std::move(vecs);
    } else {
      out.odd = std::move(vals);
      out.odd_vectors = std::move(vecs);
    }
  }
  return out;
}

std::size_t subbarrier_doublets(const ParitySpectrum& s, double barrier) {
  const auto below = [barrier](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [barrier](double e) { return e < barrier; }));
  };
  return std::min(below(s.even), below(s.odd));
}

TunnelingResult tunneling_splitting(const GridOperator& op) {
  const auto ps = parity_spectrum(op, 2);
  const auto& ax = op.grid.matter;
  const std::size_t n = ax.n, mid = n / 2;
  TunnelingResult r;
  r.barrier = op.potential[mid];
  r.hbar = op.grid.hbar;
  r.even_energy = ps.even[0];
  r.odd_energy = ps.odd[0];
  if (!(r.odd_energy < r.barrier))
    throw InvalidArgument("no sub-barrier doublet: the lowest odd level lies above the barrier (hbar_eff too large)");

  // Kinetic prefactor hbar^2/(2 mass) read back from the symbol.
  const double dk = 2.0 * std::numbers::pi / ax.length();
  const double c2 = op.kinetic[1] / (dk * dk);

  // Matching point: first grid point past the inner turning point of the
  // doublet, so both grid eigenfunctions are O(1) there.
  std::size_t jm = mid + 1;
  while (jm + 1 < n && op.potential[jm] > r.odd_energy) ++jm;
  if (jm + 1 >= n) throw InvalidArgument("no classically allowed region inside the well");
  const double xm = ax.point(jm);
  r.matching_point = xm;

  if (!op.matter_potential) throw InvalidArgument("tunneling_splitting needs the operator's matter potential model");
  const PotentialModel& V = *op.matter_potential;
  double kmax_local = 0.0;
  for (std::size_t j = mid; j <= jm; ++j)
    kmax_local = std::max(kmax_local, std::sqrt(std::max(op.potential[j] - r.even_energy, 0.0) / c2));
  const std::size_t steps = std::max<std::size_t>(2000, static_cast<std::size_t>(std::ceil(kmax_local * xm / 0.004)));
  auto g_at = [&](double e) {
    return [&V, c2, e](double x) { return (V.eval(x) - e) / c2; };
  };
  const double ue = shoot(g_at(r.even_energy), 1.0, 0.0, xm, steps);
  const double uo = shoot(g_at(r.odd_energy), 0.0, 1.0, xm, steps);

  const auto& ve = ps.even_vectors;
  const auto& vo = ps.odd_vectors;
  // Orient both states positive in the right well.
  const double se = ve(static_cast<Index>(jm), 0) < 0.0 ? -1.0 : 1.0;
  const double so = vo(static_cast<Index>(jm), 0) < 0.0 ? -1.0 : 1.0;
  const double psi_e0 = se * ve(static_cast<Index>(jm), 0) / ue;
  const double dpsi_o0 = so * vo(static_cast<Index>(jm), 0) / uo;
  double overlap = 0.0;
  for (std::size_t j = mid + 1; j < n; ++j)
    overlap += se * so * ve(static_cast<Index>(j), 0) * vo(static_cast<Index>(j), 0);
  // f = psi_e psi_o vanishes at 0 with nonzero slope, so the half-line
  // trapezoid sum needs Euler-Maclaurin endpoint terms. The odd derivatives
  // at 0 follow from the ODE: f1 = psi_e psi_o', f3 = f1 (3 g_e + g_o).
  const double hx = ax.dx();
  const double f1 = psi_e0 * dpsi_o0;
  const double f3 = f1 * (3.0 * g_at(r.even_energy)(0.0) + g_at(r.odd_energy)(0.0));
  overlap = overlap * hx + hx * hx / 12.0 * f1 - std::pow(hx, 4) / 720.0 * f3;
  r.splitting = c2 * psi_e0 * dpsi_o0 / overlap;

  r.direct = r.odd_energy - r.even_energy;
  const double resolution = 1e-11 * std::max(1.0, std::abs(r.odd_energy));
  r.direct_resolved = r.direct > 1e3 * resolution;
  return r;
}

GridOperator semiclassical_operator(const PhysicalParams& p, const PotentialModel& V, std::size_t levels,
                                    const AdvisorOptions& opts) {
  const ProductGrid g = advise_grid(Gauge::semiclassical, p, V, levels, opts);
  HamiltonianSpec spec;
  spec.gauge = Gauge::semiclassical;
  spec.physical = p;
  spec.potential = V;
  spec.grid = build_matter_grid(g.matter, p.hbar);
  return build_semiclassical(spec);
}

std::vector<TunnelingPoint> tunneling_sweep(const PhysicalParams& base, const PotentialModel& V,
                                            const std::vector<double>& epsilons, const AdvisorOptions& opts) {
  std::vector<TunnelingPoint> out;
  for (double eps : epsilons) {
    PhysicalParams p = base;
    p.epsilon = eps;
    TunnelingPoint pt;
    pt.epsilon = eps;
    pt.hbar_eff = dressed_params(p).hbar_eff;
    pt.result = tunneling_splitting(semiclassical_operator(p, V, 4, opts));
    out.push_back(pt);
  }
  return out;
}

double well_area(const PotentialModel& V, double mass, double energy, double x_lo, double x_hi) {
  if (!(x_hi > x_lo)) throw InvalidArgument("well_area needs x_lo < x_hi");
  const std::size_t scan = 20000;
  const double dx = (x_hi - x_lo) / static_cast<double>(scan);
  auto f = [&](double x) { return energy - V.eval(x); };
  auto refine = [&](double a, double b) {
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
      const double c = 0.5 * (a + b);
      if ((f(a) > 0.0) == (f(c) > 0.0)) a = c;
      else b = c;
    }
    return 0.5 * (a + b);
  };
  double area = 0.0;
  double start = f(x_lo) > 0.0 ? x_lo : std::nan("");
  for (std::size_t i = 0; i < scan; ++i) {
    const double a = x_lo + dx * static_cast<double>(i), b = a + dx;
    const bool ia = f(a) > 0.0, ib = f(b) > 0.0;
    double end = std::nan("");
    if (!ia && ib) start = refine(a, b);
    if (ia && !ib) end = refine(a, b);
    if (i + 1 == scan && ib) end = x_hi;
    if (!std::isnan(start) && !std::isnan(end)) {
      // x = c - d cos(t) removes the square-root endpoint behaviour.
      const double c = 0.5 * (start + end), d = 0.5 * (end - start);
      const std::size_t m = 4000;
      const double ht = std::numbers::pi / static_cast<double>(m);
      double s = 0.0;
      for (std::size_t k = 0; k <= m; ++k) {
        const double t = ht * static_cast<double>(k);
        const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        s += w * std::sqrt(2.0 * mass * std::max(f(c - d * std::cos(t)), 0.0)) * d * std::sin(t);
      }
      area += 2.0 * s * ht / 3.0;
      start = std::nan("");
    }
  }
  return area;
}

}  // namespace cavlab
