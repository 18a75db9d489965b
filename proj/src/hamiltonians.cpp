#include "cavlab/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "cavlab/diagnostics.hpp"
#include "cavlab/errors.hpp"
#include "cavlab/fft.hpp"
#include "cavlab/simd/kernels.hpp"

namespace cavlab {

std::string to_string(Gauge g) {
  switch (g) {
    case Gauge::MG: return "MG";
    case Gauge::AG: return "AG";
    case Gauge::AG_rescaled: return "AG_rescaled";
    case Gauge::MG_weak: return "MG_weak";
    case Gauge::AG_weak: return "AG_weak";
    case Gauge::semiclassical: return "semiclassical";
  }
  return "?";
}

Gauge gauge_from_string(const std::string& s) {
  for (Gauge g : {Gauge::MG, Gauge::AG, Gauge::AG_rescaled, Gauge::MG_weak, Gauge::AG_weak, Gauge::semiclassical})
    if (to_string(g) == s) return g;
  throw InvalidArgument("unknown gauge '" + s + "'");
}

namespace {

using Symbol = std::function<double(double, double)>;  // (p, c) -> T

std::size_t mirror(std::size_t j, std::size_t n) { return (n - j) % n; }

// Fills kinetic and kinetic_half from a symbol even under (p, c) -> (-p, -c).
void fill_kinetic(GridOperator& op, const Symbol& T) {
  const auto& g = op.grid;
  const auto p = g.momenta(0);
  const std::size_t n0 = g.matter.n;
  if (!g.cavity) {
    op.kinetic.assign(n0, 0.0);
    for (std::size_t j = 0; j < n0; ++j) op.kinetic[j] = 0.5 * (T(p[j], 0.0) + T(p[mirror(j, n0)], 0.0));
    op.kinetic_half.assign(n0 / 2 + 1, 0.0);
    for (std::size_t j = 0; j < op.kinetic_half.size(); ++j) op.kinetic_half[j] = op.kinetic[j];
    return;
  }
  const auto c = g.momenta(1);
  const std::size_t n1 = g.cavity->n;
  op.kinetic.assign(n0 * n1, 0.0);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j)
      op.kinetic[i * n1 + j] = 0.5 * (T(p[i], c[j]) + T(p[mirror(i, n0)], c[mirror(j, n1)]));
  const std::size_t h1 = n1 / 2 + 1;
  op.kinetic_half.assign(n0 * h1, 0.0);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < h1; ++j) op.kinetic_half[i * h1 + j] = op.kinetic[i * n1 + j];
}

void fill_potential(GridOperator& op, const std::function<double(double, double)>& V) {
  const auto& g = op.grid;
  const auto xs = g.matter.points();
  if (!g.cavity) {
    op.potential.assign(xs.size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) op.potential[i] = V(xs[i], 0.0);
    return;
  }
  const auto cs = g.cavity->points();
  op.potential.assign(xs.size() * cs.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < cs.size(); ++j) op.potential[i * cs.size() + j] = V(xs[i], cs[j]);
}

void require_axis(const HamiltonianSpec& spec, AxisLabel cavity_label) {
  if (!spec.grid.cavity) throw InvalidArgument(to_string(spec.gauge) + " needs a matter x cavity grid");
  if (spec.grid.cavity->label != cavity_label)
    throw InvalidArgument(to_string(spec.gauge) + " needs a cavity axis labelled " + to_string(cavity_label));
  if (spec.grid.hbar != spec.physical.hbar)
    throw InvalidArgument("grid hbar must equal the physical hbar for two-coordinate operators");
}

// Zero-point momentum of a harmonic fit times sqrt 2; used only for the
// resolution diagnostic.
void check_momentum_extent(const AxisGrid& axis, double hbar, double mass, double freq, const char* what) {
  if (!(freq > 0.0) || !(mass > 0.0)) return;
  const double p_scale = std::sqrt(hbar * mass * freq);
  const double p_grid = std::numbers::pi * hbar / axis.dx();
  if (p_grid < 4.0 * p_scale) {
    std::ostringstream os;
    os << what << " momentum extent " << p_grid << " is below 4x the classical momentum scale " << p_scale;
    warn("grid.coarse_momentum", os.str());
  }
}

double local_frequency(const PotentialModel& V, double mass) {
  const double k = V.second_derivative(V.argmin());
  return k > 0.0 ? std::sqrt(k / mass) : 0.0;
}

// Decoupled acceleration-gauge reference: matter p^2/2M with the potential
// averaged over the cavity ground density, cavity oscillator unchanged.
SeparableReference ag_reference(const ProductGrid& g, const DressedParams& d, const PhysicalParams& p,
                                const PotentialModel& V, bool rescaled) {
  SeparableReference r;
  const auto pk = g.momenta(0);
  const auto ck = g.momenta(1);
  const auto xs = g.matter.points();
  const auto cs = g.cavity->points();
  const double coupling = rescaled ? d.xi : d.zeta;
  // Ground-state density of the cavity factor: variance hbar/(2 mass freq).
  const double var = rescaled ? 0.5 * p.hbar : p.hbar / (2.0 * d.mu * d.Omega);
  std::vector<double> w(cs.size());
  double wsum = 0.0;
  for (std::size_t j = 0; j < cs.size(); ++j) {
    w[j] = std::exp(-cs[j] * cs[j] / (2.0 * var));
    wsum += w[j];
  }
  r.tx.resize(pk.size());
  r.vx.resize(xs.size());
  for (std::size_t i = 0; i < pk.size(); ++i) r.tx[i] = pk[i] * pk[i] / (2.0 * d.M);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cs.size(); ++j)
      if (w[j] > 1e-14 * wsum) s += w[j] * V.eval(xs[i] + coupling * cs[j]);
    r.vx[i] = s / wsum;
  }
  r.tc.resize(ck.size());
  r.vc.resize(cs.size());
  for (std::size_t j = 0; j < ck.size(); ++j)
    r.tc[j] = rescaled ? 0.5 * d.Omega * ck[j] * ck[j] : ck[j] * ck[j] / (2.0 * d.mu);
  for (std::size_t j = 0; j < cs.size(); ++j)
    r.vc[j] = rescaled ? 0.5 * d.Omega * cs[j] * cs[j] : 0.5 * p.omega * p.omega * cs[j] * cs[j];
  r.frame_potential.resize(xs.size() * cs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < cs.size(); ++j)
      r.frame_potential[i * cs.size() + j] = V.eval(xs[i] + coupling * cs[j]) + r.vc[j];
  return r;
}

GridOperator base(const HamiltonianSpec& spec) {
  GridOperator op;
  op.gauge = spec.gauge;
  op.grid = spec.grid;
  op.physical = spec.physical;
  op.dressed = dressed_params(spec.physical);
  op.matter_potential = spec.potential;
  return op;
}

}  // namespace

GridOperator build_mg(const HamiltonianSpec& spec) {
  if (spec.gauge != Gauge::MG) throw InvalidArgument("build_mg called with gauge " + to_string(spec.gauge));
  require_axis(spec, AxisLabel::cavity_q);
  GridOperator op = base(spec);
  const double m = spec.physical.m, s = op.dressed.varsigma, w = spec.physical.omega;
  fill_kinetic(op, [=](double p, double c) {
    const double u = p + s * c;
    return u * u / (2.0 * m) + 0.5 * c * c;
  });
  const auto& V = spec.potential;
  fill_potential(op, [&](double x, double q) { return V.eval(x) + 0.5 * w * w * q * q; });
  check_momentum_extent(spec.grid.matter, spec.physical.hbar, op.dressed.M, local_frequency(V, op.dressed.M), "matter");
  check_momentum_extent(*spec.grid.cavity, spec.physical.hbar, op.dressed.mu, op.dressed.Omega, "cavity");
  op.reference = ag_reference(spec.grid, op.dressed, spec.physical, V, false);
  op.reference->shear = op.dressed.zeta;
  return op;
}

GridOperator build_ag(const HamiltonianSpec& spec) {
  if (spec.gauge != Gauge::AG) throw InvalidArgument("build_ag called with gauge " + to_string(spec.gauge));
  require_axis(spec, AxisLabel::cavity_q);
  GridOperator op = base(spec);
  const double M = op.dressed.M, mu = op.dressed.mu, zeta = op.dressed.zeta, w = spec.physical.omega;
  fill_kinetic(op, [=](double p, double c) { return p * p / (2.0 * M) + c * c / (2.0 * mu); });
  const auto& V = spec.potential;
  // mu Omega^2 = omega^2 exactly.
  fill_potential(op, [&](double x, double q) { return V.eval(x + zeta * q) + 0.5 * w * w * q * q; });
  check_momentum_extent(spec.grid.matter, spec.physical.hbar, M, local_frequency(V, M), "matter");
  check_momentum_extent(*spec.grid.cavity, spec.physical.hbar, mu, op.dressed.Omega, "cavity");
  op.reference = ag_reference(spec.grid, op.dressed, spec.physical, V, false);
  return op;
}

GridOperator build_ag_rescaled(const HamiltonianSpec& spec) {
  if (spec.gauge != Gauge::AG_rescaled)
    throw InvalidArgument("build_ag_rescaled called with gauge " + to_string(spec.gauge));
  require_axis(spec, AxisLabel::cavity_Q);
  GridOperator op = base(spec);
  const double M = op.dressed.M, W = op.dressed.Omega, xi = op.dressed.xi;
  fill_kinetic(op, [=](double p, double c) { return p * p / (2.0 * M) + 0.5 * W * c * c; });
  const auto& V = spec.potential;
  fill_potential(op, [&](double x, double Q) { return V.eval(x + xi * Q) + 0.5 * W * Q * Q; });
  check_momentum_extent(spec.grid.matter, spec.physical.hbar, M, local_frequency(V, M), "matter");
  check_momentum_extent(*spec.grid.cavity, spec.physical.hbar, 1.0 / W, W, "cavity");
  op.reference = ag_reference(spec.grid, op.dressed, spec.physical, V, true);
  return op;
}

GridOperator build_weak_truncation(const HamiltonianSpec& spec) {
  if (spec.gauge != Gauge::MG_weak && spec.gauge != Gauge::AG_weak)
    throw InvalidArgument("build_weak_truncation needs gauge MG_weak or AG_weak");
  require_axis(spec, AxisLabel::cavity_q);
  const auto regime = classify_regime(spec.physical);
  if (regime.label != RegimeLabel::weak) {
    std::ostringstream os;
    os << "weak-coupling truncation used at ratio " << regime.ratio << " (" << to_string(regime.label) << " regime)";
    warn("coupling.not_weak", os.str());
  }
  GridOperator op = base(spec);
  const double m = spec.physical.m, w = spec.physical.omega;
  const auto& V = spec.potential;
  if (spec.gauge == Gauge::MG_weak) {
    const double s = op.dressed.varsigma;
    fill_kinetic(op, [=](double p, double c) { return p * p / (2.0 * m) + 0.5 * c * c + (s / m) * p * c; });
    fill_potential(op, [&](double x, double q) { return V.eval(x) + 0.5 * w * w * q * q; });
  } else {
    const double zeta = op.dressed.zeta;
    fill_kinetic(op, [=](double p, double c) { return p * p / (2.0 * m) + 0.5 * c * c; });
    fill_potential(op, [&](double x, double q) {
      return V.eval(x) + 0.5 * w * w * q * q + zeta * V.derivative(x) * q;
    });
  }
  // Bare decoupled reference.
  SeparableReference r;
  const auto pk = spec.grid.momenta(0);
  const auto ck = spec.grid.momenta(1);
  const auto xs = spec.grid.matter.points();
  const auto cs = spec.grid.cavity->points();
  for (double v : pk) r.tx.push_back(v * v / (2.0 * m));
  for (double x : xs) r.vx.push_back(V.eval(x));
  for (double v : ck) r.tc.push_back(0.5 * v * v);
  for (double q : cs) r.vc.push_back(0.5 * w * w * q * q);
  op.reference = std::move(r);
  return op;
}

GridOperator build_semiclassical(const HamiltonianSpec& spec) {
  if (spec.gauge != Gauge::semiclassical)
    throw InvalidArgument("build_semiclassical called with gauge " + to_string(spec.gauge));
  if (spec.grid.cavity) throw InvalidArgument("semiclassical operator needs a matter-only grid");
  GridOperator op = base(spec);
  op.grid.hbar = op.dressed.hbar_eff;
  const double m = spec.physical.m;
  // With grid momenta hbar_eff k this is -hbar_eff^2/(2m) d^2/dx^2, i.e.
  // p^2/(2M) in bare units.
  fill_kinetic(op, [=](double p, double) { return p * p / (2.0 * m); });
  const auto& V = spec.potential;
  fill_potential(op, [&](double x, double) { return V.eval(x); });
  check_momentum_extent(op.grid.matter, op.grid.hbar, m, local_frequency(V, m), "matter");
  return op;
}

GridOperator build_operator(const HamiltonianSpec& spec) {
  switch (spec.gauge) {
    case Gauge::MG: return build_mg(spec);
    case Gauge::AG: return build_ag(spec);
    case Gauge::AG_rescaled: return build_ag_rescaled(spec);
    case Gauge::MG_weak:
    case Gauge::AG_weak: return build_weak_truncation(spec);
    case Gauge::semiclassical: return build_semiclassical(spec);
  }
  throw InvalidArgument("unknown gauge");
}

void GridOperator::apply_kinetic(const cplx* in, cplx* out) const {
  const std::size_t n = dimension();
  std::copy(in, in + n, out);
  const auto dims = shape();
  fft::forward(dims, out);
  thread_local rvec scaled;
  scaled.resize(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = kinetic[i] * inv;
  simd::mul_real(out, scaled.data(), n);
  fft::backward(dims, out);
}

void GridOperator::apply(const cplx* in, cplx* out) const {
  apply_kinetic(in, out);
  simd::add_mul_real(out, potential.data(), in, dimension());
}

WaveField GridOperator::apply(const WaveField& psi) const {
  if (psi.size() != dimension()) throw InvalidArgument("field does not live on the operator grid");
  WaveField out(psi.grid);
  out.time = psi.time;
  apply(psi.data.data(), out.data.data());
  return out;
}

void GridOperator::apply_real(const double* in, double* out) const {
  const std::size_t n = dimension();
  const auto dims = shape();
  const std::size_t h = kinetic_half.size();
  thread_local cvec spec;
  thread_local rvec scaled;
  spec.resize(h);
  if (scaled.size() != h) scaled.resize(h);
  fft::r2c(dims, in, spec.data());
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < h; ++i) scaled[i] = kinetic_half[i] * inv;
  simd::mul_real(spec.data(), scaled.data(), h);
  fft::c2r(dims, spec.data(), out);
  simd::add_mul_rr(out, potential.data(), in, n);
}

double GridOperator::expectation(const WaveField& psi) const {
  const WaveField h = apply(psi);
  return psi.inner(h).real() / psi.norm2();
}

double GridOperator::kinetic_max() const { return *std::max_element(kinetic.begin(), kinetic.end()); }
double GridOperator::potential_min() const { return *std::min_element(potential.begin(), potential.end()); }
double GridOperator::potential_max() const { return *std::max_element(potential.begin(), potential.end()); }

Eigen::MatrixXd GridOperator::dense() const {
  const std::size_t n = dimension();
  if (n > dense_cap) {
    std::ostringstream os;
    os << "dense materialization of dimension " << n << " exceeds the cap " << dense_cap;
    throw InvalidArgument(os.str());
  }
  const auto dims = shape();
  cvec half(kinetic_half.begin(), kinetic_half.end());
  rvec kern(n);
  fft::c2r(dims, half.data(), kern.data());
  const double inv = 1.0 / static_cast<double>(n);
  const std::size_t n0 = grid.matter.n;
  const std::size_t n1 = grid.cavity ? grid.cavity->n : 1;
  Eigen::MatrixXd H(n, n);
  for (std::size_t i0 = 0; i0 < n0; ++i0)
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      const std::size_t r = i0 * n1 + i1;
      for (std::size_t j0 = 0; j0 < n0; ++j0) {
        const std::size_t d0 = (i0 + n0 - j0) % n0;
        for (std::size_t j1 = 0; j1 < n1; ++j1) {
          const std::size_t d1 = (i1 + n1 - j1) % n1;
          H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j0 * n1 + j1)) = kern[d0 * n1 + d1] * inv;
        }
      }
      H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) += potential[r];
    }
  // Kernel symmetry holds to rounding; enforce it exactly for the solver.
  H = 0.5 * (H + H.transpose()).eval();
  return H;
}

WaveField apply_ma_unitary(const WaveField& psi, const PhysicalParams& p, MaDirection dir, double tolerance) {
  if (!psi.grid.cavity || psi.grid.cavity->label != AxisLabel::cavity_q)
    throw InvalidArgument("the MA unitary acts on fields over an x*q grid");
  const double zeta = dressed_params(p).zeta;
  WaveField out = psi;
  if (zeta == 0.0) return out;
  const auto& ax = psi.grid.matter;
  const std::size_t n0 = ax.n, n1 = psi.grid.cavity->n;
  const auto qs = psi.grid.cavity->points();
  const double sign = dir == MaDirection::mg_to_ag ? 1.0 : -1.0;

  // psi_new(x) = psi_old(x + s) with s = sign zeta q; content within |s| of
  // the edge it moves towards wraps around.
  const double dx = ax.dx();
  double wrapped = 0.0, total = 0.0;
  double s_max = 0.0;
  for (std::size_t j = 0; j < n1; ++j) {
    const double s = sign * zeta * qs[j];
    s_max = std::max(s_max, std::abs(s));
    const auto cells = static_cast<std::size_t>(std::ceil(std::abs(s) / dx));
    for (std::size_t i = 0; i < n0; ++i) {
      const double w = std::norm(psi.data[i * n1 + j]);
      total += w;
      const bool lost = s > 0.0 ? i < cells : (s < 0.0 && i + cells >= n0);
      if (lost) wrapped += w;
    }
  }
  if (total > 0.0 && wrapped / total > tolerance) {
    const double half = 0.5 * ax.length();
    std::ostringstream os;
    os << "MA shear moves " << wrapped / total << " of the probability through the x boundary; matter axis "
       << "half-extent must be at least " << half + s_max;
    throw GridSupportError(os.str(), half + s_max);
  }

  fft::forward_axis0(n0, n1, out.data.data());
  const auto k = ax.wavenumbers();
  const double inv = 1.0 / static_cast<double>(n0);
  for (std::size_t i = 0; i < n0; ++i) {
    // The Nyquist mode has no unique sign; translate it by the real part
    // only so real fields stay real.
    const bool nyq = (2 * i == n0);
    for (std::size_t j = 0; j < n1; ++j) {
      const double phase = k[i] * sign * zeta * qs[j];
      const cplx f = nyq ? cplx(std::cos(phase), 0.0) : std::polar(1.0, phase);
      out.data[i * n1 + j] *= f * inv;
    }
  }
  fft::backward_axis0(n0, n1, out.data.data());
  return out;
}

void shear_rows(const ProductGrid& grid, double shift, double* data) {
  if (!grid.cavity) throw InvalidArgument("shear_rows needs a two-axis grid");
  if (shift == 0.0) return;
  const std::size_t n0 = grid.matter.n, n1 = grid.cavity->n;
  const auto k = grid.matter.wavenumbers();
  const auto cs = grid.cavity->points();
  thread_local cvec buf;
  buf.resize(n0 * n1);
  for (std::size_t i = 0; i < n0 * n1; ++i) buf[i] = cplx(data[i], 0.0);
  fft::forward_axis0(n0, n1, buf.data());
  const double inv = 1.0 / static_cast<double>(n0);
  for (std::size_t i = 0; i < n0; ++i) {
    const bool nyq = (2 * i == n0);
    for (std::size_t j = 0; j < n1; ++j) {
      const double phase = k[i] * shift * cs[j];
      buf[i * n1 + j] *= (nyq ? cplx(std::cos(phase), 0.0) : std::polar(1.0, phase)) * inv;
    }
  }
  fft::backward_axis0(n0, n1, buf.data());
  for (std::size_t i = 0; i < n0 * n1; ++i) data[i] = buf[i].real();
}

rvec coordinate_array(const ProductGrid& grid, std::size_t axis) {
  const std::size_t n0 = grid.matter.n;
  const std::size_t n1 = grid.cavity ? grid.cavity->n : 1;
  const auto pts = grid.axis(axis).points();
  rvec out(n0 * n1);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) out[i * n1 + j] = axis == 0 ? pts[i] : pts[j];
  return out;
}

}  // namespace cavlab
