#include "cavlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cavlab/diagnostics.hpp"
#include "cavlab/errors.hpp"
#include "cavlab/fft.hpp"
#include "cavlab/simd/kernels.hpp"

namespace cavlab {

namespace {

cvec phases(const rvec& values, double factor) {
  cvec out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::polar(1.0, -factor * values[i]);
  return out;
}

std::size_t default_edge(std::size_t n) { return std::max<std::size_t>(2, n / 32); }

double edge_fraction(const WaveField& psi, std::size_t cells) {
  if (cells) return edge_mass(psi, cells);
  // Per-axis default band: evaluate with the narrower axis' band on both.
  const std::size_t c0 = default_edge(psi.grid.matter.n);
  const std::size_t c1 = psi.grid.cavity ? default_edge(psi.grid.cavity->n) : c0;
  return edge_mass(psi, std::min(c0, c1));
}

// Oscillator (mass, frequency) of the dressed cavity mode on this axis.
std::pair<double, double> dressed_oscillator(const AxisGrid& axis, const DressedParams& d) {
  if (axis.label == AxisLabel::cavity_Q) return {1.0 / d.Omega, d.Omega};
  return {d.mu, d.Omega};
}

}  // namespace

SplitOperatorPropagator::SplitOperatorPropagator(const GridOperator& op, double dt) : op_(&op), dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive and finite");
  const double h = op.grid.hbar;
  // The 1/N of the unnormalized inverse transform is folded into the
  // kinetic phases.
  const double inv = 1.0 / static_cast<double>(op.dimension());
  half_kinetic_ = phases(op.kinetic, 0.5 * dt / h);
  full_kinetic_ = phases(op.kinetic, dt / h);
  for (auto& z : half_kinetic_) z *= inv;
  for (auto& z : full_kinetic_) z *= inv;
  potential_phase_ = phases(op.potential, dt / h);
}

void SplitOperatorPropagator::advance(WaveField& psi, std::size_t n) const {
  if (n == 0) return;
  if (psi.size() != op_->dimension()) throw InvalidArgument("field does not live on the propagator grid");
  const auto dims = op_->shape();
  const std::size_t N = psi.size();
  cplx* z = psi.data.data();
  fft::forward(dims, z);
  simd::mul_complex(z, half_kinetic_.data(), N);
  fft::backward(dims, z);
  for (std::size_t s = 0; s < n; ++s) {
    simd::mul_complex(z, potential_phase_.data(), N);
    fft::forward(dims, z);
    simd::mul_complex(z, (s + 1 == n ? half_kinetic_ : full_kinetic_).data(), N);
    fft::backward(dims, z);
  }
  psi.time += dt_ * static_cast<double>(n);
}

WaveField coherent_state(const GridOperator& op, double x0, double p0, double sigma) {
  const double h = op.grid.hbar;
  const cvec m = gaussian_on_axis(op.grid.matter, x0, p0, sigma, h);
  if (!op.grid.cavity) {
    WaveField psi(op.grid);
    std::copy(m.begin(), m.end(), psi.data.begin());
    psi.normalize();
    return psi;
  }
  const auto [mass, freq] = dressed_oscillator(*op.grid.cavity, op.dressed);
  const auto g = ho_eigenfunction_on_grid(0, *op.grid.cavity, mass, freq, h);
  cvec c(g.begin(), g.end());
  return product_state(op.grid, m, c);
}

double local_coherent_width(const PotentialModel& V, double mass, double hbar, double x0) {
  double k = V.second_derivative(x0);
  if (!(k > 0.0)) k = V.second_derivative(V.argmin());
  if (!(k > 0.0)) throw InvalidArgument("no positive curvature for a local harmonic fit");
  const double w = std::sqrt(k / mass);
  return std::sqrt(hbar / (2.0 * mass * w));
}

AxisGrid packet_axis(const PotentialModel& V, double mass, double hbar, double x0, double p0, double sigma,
                     double margin) {
  if (!(sigma > 0.0) || !(hbar > 0.0) || !(mass > 0.0)) throw InvalidArgument("packet_axis needs positive sigma, hbar, mass");
  const double sp = hbar / (2.0 * sigma);
  const double k2 = std::max(std::abs(V.second_derivative(x0)), 0.0);
  const double spread = std::abs(V.derivative(x0)) * sigma + std::abs(p0) * sp / mass + sp * sp / mass +
                        hbar * std::sqrt(k2 / mass);
  const double e_top = V.eval(x0) + 0.5 * p0 * p0 / mass + 10.0 * spread;
  auto turn = [&](double dir) {
    double x = x0, h = 1e-3 * std::max(1.0, sigma);
    while (V.eval(x) < e_top && std::abs(x - x0) < 1e4) {
      x += dir * h;
      h *= 1.05;
    }
    return x;
  };
  const double lo = std::min(turn(-1.0), x0 - 8.0 * sigma), hi = std::max(turn(1.0), x0 + 8.0 * sigma);
  const double c = 0.5 * (lo + hi), half = 0.5 * (hi - lo) * margin;
  double vmin = V.eval(x0);
  for (int i = 0; i <= 2000; ++i) vmin = std::min(vmin, V.eval(lo + (hi - lo) * i / 2000.0));
  const double kmax = margin * (std::sqrt(2.0 * mass * (e_top - vmin)) / hbar + 6.0 / sigma);
  const std::size_t n = fft::next_fast_size(static_cast<std::size_t>(std::ceil(2.0 * half * kmax / std::numbers::pi)));
  return make_axis(c - half, c + half, std::max<std::size_t>(n, 16), AxisLabel::matter_x);
}

CavityOccupation reduced_cavity_occupation(const WaveField& psi, const DressedParams& dressed) {
  if (!psi.grid.cavity) throw InvalidArgument("cavity occupation needs a two-axis field");
  const AxisGrid& ax = *psi.grid.cavity;
  const auto [mass, freq] = dressed_oscillator(ax, dressed);
  const double h = psi.grid.hbar;
  // Levels whose turning point stays well inside the axis and whose local
  // wavelength is resolved.
  const double half = 0.5 * ax.length();
  const double kmax = std::acos(-1.0) / ax.dx();
  std::size_t levels = 1;
  while (levels < 200) {
    const double e = h * freq * (static_cast<double>(levels) + 0.5);
    const double turn = std::sqrt(2.0 * e / (mass * freq * freq));
    const double pk = std::sqrt(2.0 * mass * e) / h;
    if (turn > 0.7 * half || pk > 0.7 * kmax) break;
    ++levels;
  }
  std::vector<std::vector<double>> phi;
  {
    DiagnosticCapture quiet;
    phi = ho_eigenfunctions_on_grid(levels, ax, mass, freq, h);
  }
  const std::size_t n0 = psi.grid.matter.n, n1 = ax.n;
  const double dx = psi.grid.matter.dx(), dc = ax.dx();
  const double total = psi.norm2();
  CavityOccupation out;
  out.levels = levels;
  for (std::size_t k = 0; k < levels; ++k) {
    double pk = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
      cplx a(0.0, 0.0);
      const cplx* row = psi.data.data() + i * n1;
      for (std::size_t j = 0; j < n1; ++j) a += phi[k][j] * row[j];
      pk += std::norm(a * dc);
    }
    pk *= dx / total;
    out.captured += pk;
    out.n += static_cast<double>(k) * pk;
  }
  if (out.captured < 1.0 - 1e-8) {
    std::ostringstream os;
    os << "dressed-oscillator projection captured weight " << out.captured << " with " << levels << " levels";
    warn("dynamics.cavity_projection", os.str());
  }
  return out;
}

PropagationRecord propagate(const GridOperator& op, const WaveField& psi0, const PropagateOptions& opts,
                            WaveField* final_state) {
  if (psi0.size() != op.dimension() || !(psi0.grid == op.grid))
    throw InvalidArgument("initial state does not live on the operator grid");
  if (std::abs(psi0.norm2() - 1.0) > 1e-8) throw InvalidArgument("initial state is not normalized");
  const double h = op.grid.hbar;
  const double e_span = std::max(op.kinetic_max(), op.potential_max() - op.potential_min());
  if (!(opts.dt * e_span / h < 0.5)) {
    std::ostringstream os;
    os << "time step " << opts.dt << " does not resolve the grid energy range " << e_span
       << " (dt * E_max / hbar < 0.5 is the accuracy target)";
    warn("dynamics.coarse_step", os.str());
  }
  const std::size_t every = std::max<std::size_t>(1, opts.record_every);
  const bool cavity = opts.cavity_occupation && op.grid.cavity.has_value();
  const bool snaps = opts.snapshot_every > 0;
  if (snaps) {
    if (opts.snapshot_dir.empty()) throw InvalidArgument("snapshots requested without a snapshot directory");
    std::filesystem::create_directories(opts.snapshot_dir);
  }

  const SplitOperatorPropagator prop(op, opts.dt);
  const rvec x = coordinate_array(op.grid, 0);
  rvec x2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) x2[i] = x[i] * x[i];

  PropagationRecord rec;
  WaveField psi = psi0;
  double e0 = 0.0;
  auto observe = [&] {
    const double n2 = psi.norm2();
    const double mx = psi.expectation(x) / n2, mxx = psi.expectation(x2) / n2;
    rec.times.push_back(psi.time);
    rec.norm.push_back(std::sqrt(n2));
    rec.energy.push_back(op.expectation(psi));
    rec.x_mean.push_back(mx);
    rec.x2_mean.push_back(mxx);
    rec.x_var.push_back(mxx - mx * mx);
    rec.survival.push_back(std::norm(psi0.inner(psi)));
    if (cavity) rec.cavity_n.push_back(reduced_cavity_occupation(psi, op.dressed).n);
  };
  auto check_edge = [&] {
    const double e = edge_fraction(psi, opts.edge_cells);
    if (e > opts.edge_tolerance) {
      std::ostringstream os;
      os << "wavefunction reached the grid boundary at t = " << psi.time << " (edge probability " << e
         << " > " << opts.edge_tolerance << "); enlarge the grid";
      throw GridSupportError(os.str(), 1.5 * op.grid.matter.length());
    }
  };
  auto snapshot = [&] {
    char name[64];
    std::snprintf(name, sizeof name, "psi_%.6f.bin", psi.time);
    const std::string path = (std::filesystem::path(opts.snapshot_dir) / name).string();
    write_snapshot(psi, path);
    rec.snapshots.push_back(path);
  };

  check_edge();
  observe();
  e0 = rec.energy.front();
  if (snaps) snapshot();
  std::size_t done = 0;
  while (done < opts.n_steps) {
    // Advance to the next record, snapshot, or edge check (every 16 steps).
    std::size_t next = std::min(opts.n_steps, (done / every + 1) * every);
    if (snaps) next = std::min(next, (done / opts.snapshot_every + 1) * opts.snapshot_every);
    next = std::min(next, done + 16);
    prop.advance(psi, next - done);
    // Exact multiples of dt keep the record times free of accumulated
    // rounding.
    psi.time = psi0.time + opts.dt * static_cast<double>(next);
    done = next;
    check_edge();
    if (done % every == 0 || done == opts.n_steps) {
      observe();
      const std::size_t span = done - static_cast<std::size_t>(std::llround((rec.times[rec.times.size() - 2] - psi0.time) / opts.dt));
      const double dn = std::abs(rec.norm.back() - rec.norm[rec.norm.size() - 2]);
      rec.norm_drift_per_step = std::max(rec.norm_drift_per_step, dn / static_cast<double>(std::max<std::size_t>(1, span)));
    }
    if (snaps && done % opts.snapshot_every == 0) snapshot();
  }

  const double scale = std::max(1.0, std::abs(e0));
  const std::size_t nr = rec.energy.size();
  const std::size_t w = std::max<std::size_t>(1, nr / 10);
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < nr; ++i) {
    const double err = (rec.energy[i] - e0) / scale;
    rec.max_energy_error = std::max(rec.max_energy_error, std::abs(err));
    if (i < w) head += err;
    if (i + w >= nr) tail += err;
  }
  rec.energy_drift = std::abs(tail - head) / static_cast<double>(w);
  if (rec.energy_drift > opts.energy_tolerance) {
    std::ostringstream os;
    os << "secular energy drift " << rec.energy_drift << " exceeds " << opts.energy_tolerance;
    warn("dynamics.energy_drift", os.str());
  }
  if (final_state) *final_state = std::move(psi);
  return rec;
}

void write_csv(const PropagationRecord& rec, std::ostream& os) {
  os << "time,norm,energy,x_mean,x_var,survival,cavity_n\n";
  char buf[512];
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const double cn = rec.cavity_n.empty() ? std::nan("") : rec.cavity_n[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", rec.times[i], rec.norm[i],
                  rec.energy[i], rec.x_mean[i], rec.x_var[i], rec.survival[i], cn);
    os << buf;
  }
}

SpreadComparison spread_comparison(const PropagationRecord& quantum, const TrajectoryEnsembleRecord& classical,
                                   double threshold) {
  if (quantum.times.empty() || classical.times.empty()) throw InvalidArgument("spread comparison needs records");
  SpreadComparison out;
  out.threshold = threshold;
  const auto& ct = classical.times;
  bool same = ct.size() == quantum.times.size();
  for (std::size_t i = 0; same && i < ct.size(); ++i)
    same = std::abs(ct[i] - quantum.times[i]) <= 1e-12 * std::max(1.0, std::abs(ct[i]));
  out.resampled = !same;
  for (std::size_t i = 0; i < quantum.times.size(); ++i) {
    const double t = quantum.times[i];
    double cv;
    if (same) {
      cv = classical.var_x[i];
    } else {
      if (t < ct.front() - 1e-12 || t > ct.back() + 1e-12) continue;  // outside the classical window
      std::size_t j = static_cast<std::size_t>(std::upper_bound(ct.begin(), ct.end(), t) - ct.begin());
      j = std::clamp<std::size_t>(j, 1, ct.size() - 1);
      const double t0 = ct[j - 1], t1 = ct[j];
      const double u = (t - t0) / (t1 - t0);
      const double lin = (1.0 - u) * classical.var_x[j - 1] + u * classical.var_x[j];
      cv = lin;
      if (ct.size() >= 4) {
        // Lagrange cubic through the four nearest records.
        const std::size_t s = std::min(ct.size() - 4, j >= 2 ? j - 2 : 0);
        double cub = 0.0;
        for (std::size_t a = s; a < s + 4; ++a) {
          double l = 1.0;
          for (std::size_t b = s; b < s + 4; ++b)
            if (b != a) l *= (t - ct[b]) / (ct[a] - ct[b]);
          cub += l * classical.var_x[a];
        }
        out.interpolation_error = std::max(out.interpolation_error, std::abs(cub - lin));
        cv = cub;
      }
    }
    SpreadRow r;
    r.time = t;
    r.quantum_var = quantum.x_var[i];
    r.classical_var = cv;
    r.relative = std::abs(r.quantum_var - cv) / std::max(std::abs(cv), 1e-300);
    if (out.divergence_time < 0.0 && r.relative > threshold) out.divergence_time = t;
    out.rows.push_back(r);
  }
  if (out.resampled) {
    std::ostringstream os;
    os << "classical moments resampled onto the quantum time grid (interpolation error estimate "
       << out.interpolation_error << ")";
    warn("dynamics.resampled", os.str());
  }
  return out;
}

void write_csv(const SpreadComparison& cmp, std::ostream& os) {
  os << "time,quantum_var,classical_var,relative_difference\n";
  char buf[256];
  for (const auto& r : cmp.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.time, r.quantum_var, r.classical_var, r.relative);
    os << buf;
  }
}

}  // namespace cavlab
