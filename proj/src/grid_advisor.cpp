#include "cavlab/grid_advisor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "cavlab/diagnostics.hpp"
#include "cavlab/eigensolvers.hpp"
#include "cavlab/errors.hpp"
#include "cavlab/fft.hpp"

namespace cavlab {

namespace {

struct Support {
  double lo, hi, kmax;
  bool lo_edge, hi_edge, k_edge;
};

Support measure(const AxisGrid& ax, const Eigen::VectorXd& v, double tail) {
  const std::size_t n = ax.n;
  const double peak = v.cwiseAbs().maxCoeff();
  Support s{ax.x_max, ax.x_min, 0.0, false, false, false};
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(v[static_cast<Eigen::Index>(i)]) > tail * peak) {
      s.lo = std::min(s.lo, ax.point(i));
      s.hi = std::max(s.hi, ax.point(i));
    }
  }
  const std::size_t edge = std::max<std::size_t>(2, n / 20);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(v[static_cast<Eigen::Index>(i)]) <= tail * peak) continue;
    if (i < edge) s.lo_edge = true;
    if (i + edge >= n) s.hi_edge = true;
  }

  cvec spec(n / 2 + 1);
  rvec buf(v.data(), v.data() + n);
  fft::r2c({n}, buf.data(), spec.data());
  double speak = 0.0;
  for (const auto& z : spec) speak = std::max(speak, std::abs(z));
  const double dk = 2.0 * std::numbers::pi / ax.length();
  for (std::size_t j = 0; j < spec.size(); ++j)
    if (std::abs(spec[j]) > tail * speak) s.kmax = std::max(s.kmax, dk * static_cast<double>(j));
  for (std::size_t j = spec.size() - std::max<std::size_t>(2, spec.size() / 10); j < spec.size(); ++j)
    if (std::abs(spec[j]) > tail * speak) s.k_edge = true;
  return s;
}

std::size_t points_for(double length, double kmax, const AdvisorOptions& o) {
  const double need = std::ceil(length * kmax / std::numbers::pi);
  std::size_t n = std::max<std::size_t>(o.min_points, static_cast<std::size_t>(need));
  n = fft::next_fast_size(n, true);
  return n;
}

}  // namespace

double hermite_support(std::size_t j, double tail) {
  // Scan outward from beyond the classical turning point until the
  // normalized Hermite function has fallen below tail * peak for good.
  const double turn = std::sqrt(2.0 * static_cast<double>(j) + 1.0);
  const double umax = turn + 12.0 + std::sqrt(-2.0 * std::log(std::max(tail, 1e-300)));
  const std::size_t n = 4000;
  double peak = 0.0, last = 0.0;
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = umax * static_cast<double>(i) / static_cast<double>(n);
    // Recurrence in log-safe form: psi_0 = pi^-1/4 exp(-u^2/2).
    double prev = 0.0, cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * u * u);
    for (std::size_t k = 0; k < j; ++k) {
      const double next = std::sqrt(2.0 / static_cast<double>(k + 1)) * u * cur -
                          std::sqrt(static_cast<double>(k) / static_cast<double>(k + 1)) * prev;
      prev = cur;
      cur = next;
    }
    vals[i] = std::abs(cur);
    peak = std::max(peak, vals[i]);
  }
  for (std::size_t i = n + 1; i-- > 0;) {
    if (vals[i] > tail * peak) {
      last = umax * static_cast<double>(i) / static_cast<double>(n);
      break;
    }
  }
  return last;
}

MatterProbe probe_matter(const PotentialModel& V, double mass, double hbar, std::size_t count,
                         const AdvisorOptions& opts) {
  if (count == 0) throw InvalidArgument("probe_matter needs count >= 1");
  const double threshold = V.continuum_threshold();
  if (threshold == -std::numeric_limits<double>::infinity())
    throw InvalidArgument("potential " + V.kind() + " is not confining; no bound states to size a grid for");
  const double xc = V.is_even() ? 0.0 : V.argmin();
  const double xm = V.argmin();
  const double k2 = V.second_derivative(xm);
  const double wloc = k2 > 0.0 ? std::sqrt(k2 / mass) : 1.0;
  const double sigma = std::sqrt(hbar / (2.0 * mass * wloc));
  // Initial box from the classical turning points at a harmonic estimate of
  // the highest wanted level; the edge checks below grow it as needed.
  double e_top = V.eval(xm) + hbar * wloc * (static_cast<double>(count) + 0.5);
  // Beyond a finite dissociation energy the turning point runs off to
  // infinity; aim just below it instead.
  if (std::isfinite(threshold)) e_top = std::min(e_top, V.eval(xm) + 0.999 * (threshold - V.eval(xm)));
  // Box edges grow independently so a steep wall on one side (Morse) is not
  // pushed up to energies that swamp the dense solve.
  double ext[2] = {0.0, 0.0};  // distance of the left / right edge from xc
  for (int side = 0; side < 2; ++side) {
    const double dir = side ? 1.0 : -1.0;
    double x = xm, step = 0.05 * sigma;
    while (V.eval(x) < e_top && std::abs(x - xm) < 1e6 * sigma) {
      x += dir * step;
      step *= 1.05;
    }
    ext[side] = std::max(dir * (x - xc), 0.0) + 6.0 * sigma;
  }
  if (V.is_even()) ext[0] = ext[1] = std::max(ext[0], ext[1]);
  const double pcl = std::sqrt(2.0 * mass * std::max(e_top - V.eval(xm), 0.0)) / hbar;
  double kmax = pcl + 3.0 / sigma;

  std::optional<DiagnosticCapture> quiet;
  quiet.emplace();
  for (int attempt = 0; attempt < 40; ++attempt) {
    const double length = ext[0] + ext[1];
    std::size_t n = fft::next_fast_size(
        std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(length * kmax / std::numbers::pi))), true);
    if (n > 2048) n = 2048;
    const AxisGrid ax = make_axis(xc - ext[0], xc + ext[1], n, AxisLabel::matter_x);
    HamiltonianSpec spec;
    spec.gauge = Gauge::semiclassical;
    spec.physical = PhysicalParams{mass, 1.0, hbar, 0.0};
    spec.potential = V;
    spec.grid = build_matter_grid(ax, hbar);
    GridOperator op = build_semiclassical(spec);
    op.dense_cap = 4096;
    const auto es = dense_eigensolve(op, std::min(count, n));
    MatterProbe pr;
    pr.x_lo = ax.x_max;
    pr.x_hi = ax.x_min;
    bool lo_edge = false, hi_edge = false, k_edge = false;
    std::size_t bound = es.values.size();
    while (bound > 0 && es.values[bound - 1] >= threshold) --bound;
    // Unbound box states always reach the edge; size the grid for the bound
    // ones only.
    if (bound == 0) throw InvalidArgument("potential " + V.kind() + " has no bound state at this hbar");
    for (std::size_t s = 0; s < bound; ++s) {
      const auto sup = measure(ax, es.vectors.col(static_cast<Eigen::Index>(s)), opts.tail);
      lo_edge |= sup.lo_edge;
      hi_edge |= sup.hi_edge;
      k_edge |= sup.k_edge;
      pr.x_lo = std::min(pr.x_lo, sup.lo);
      pr.x_hi = std::max(pr.x_hi, sup.hi);
      pr.k_max = std::max(pr.k_max, sup.kmax);
      pr.state_x_lo.push_back(sup.lo);
      pr.state_x_hi.push_back(sup.hi);
      pr.state_k_max.push_back(sup.kmax);
    }
    pr.energies.assign(es.values.begin(), es.values.begin() + static_cast<std::ptrdiff_t>(bound));
    if (!lo_edge && !hi_edge && !k_edge) {
      quiet.reset();
      if (bound < es.values.size())
        warn("grid.continuum", std::to_string(es.values.size() - bound) + " of " + std::to_string(es.values.size()) +
                                   " requested matter levels lie above the continuum threshold " +
                                   std::to_string(threshold) + "; grid sized for the bound ones");
      return pr;
    }
    if (V.is_even() && (lo_edge || hi_edge)) lo_edge = hi_edge = true;
    if (lo_edge) ext[0] *= 1.25;
    if (hi_edge) ext[1] *= 1.25;
    if (k_edge) {
      if (n >= 2048) throw GridSupportError("probe_matter: momentum support exceeds the probe limit", ext[0] + ext[1]);
      kmax *= 1.25;
    }
  }
  throw GridSupportError("probe_matter: could not bracket the matter states", ext[0] + ext[1]);
}

ProductGrid advise_grid(Gauge gauge, const PhysicalParams& p, const PotentialModel& V, std::size_t levels,
                        const AdvisorOptions& opts) {
  if (levels == 0) throw InvalidArgument("advise_grid needs levels >= 1");
  const auto d = dressed_params(p);
  const std::size_t want = levels + opts.extra_levels;

  if (gauge == Gauge::semiclassical) {
    const auto pr = probe_matter(V, p.m, d.hbar_eff, want, opts);
    const double mid = 0.5 * (pr.x_lo + pr.x_hi);
    double half = 0.5 * (pr.x_hi - pr.x_lo) * opts.margin;
    double lo = mid - half, hi = mid + half;
    if (V.is_even()) {
      const double h = std::max(std::abs(lo), std::abs(hi));
      lo = -h;
      hi = h;
    }
    const std::size_t n = std::min(opts.max_points, points_for(hi - lo, pr.k_max * opts.margin, opts));
    return build_matter_grid(make_axis(lo, hi, n, AxisLabel::matter_x), d.hbar_eff);
  }

  // Matter factor: p^2/(2M) + V with hbar, same as the semiclassical problem.
  const auto pr = probe_matter(V, d.M, p.hbar, want, opts);

  // Combined levels of the decoupled picture pick how many cavity quanta matter.
  struct Lev {
    double e;
    std::size_t i, j;
  };
  std::vector<Lev> all;
  for (std::size_t i = 0; i < pr.energies.size(); ++i)
    for (std::size_t j = 0; j < want; ++j)
      all.push_back({pr.energies[i] + p.hbar * d.Omega * (static_cast<double>(j) + 0.5), i, j});
  std::sort(all.begin(), all.end(), [](const Lev& a, const Lev& b) { return a.e < b.e; });
  std::size_t imax = 0, jmax = 0;
  for (std::size_t s = 0; s < std::min(want, all.size()); ++s) {
    imax = std::max(imax, all[s].i);
    jmax = std::max(jmax, all[s].j);
  }
  double xlo = pr.x_hi, xhi = pr.x_lo, kx = 0.0;
  for (std::size_t i = 0; i <= imax; ++i) {
    xlo = std::min(xlo, pr.state_x_lo[i]);
    xhi = std::max(xhi, pr.state_x_hi[i]);
    kx = std::max(kx, pr.state_k_max[i]);
  }

  double uj = 0.0;
  for (std::size_t j = 0; j <= jmax; ++j) uj = std::max(uj, hermite_support(j, opts.tail));

  const bool rescaled = gauge == Gauge::AG_rescaled;
  // Oscillator length: q with mass mu, frequency Omega; Q with mass 1/Omega.
  const double ell = rescaled ? std::sqrt(p.hbar) : std::sqrt(p.hbar / (d.mu * d.Omega));
  const double coupling = rescaled ? d.xi : d.zeta;
  const double c_ext = uj * ell;
  const double kc = uj / ell;

  // Shear between x and the cavity coordinate widens x by coupling * c_ext
  // and the cavity wavenumbers by coupling * kx, in either gauge.
  double half_x = 0.5 * (xhi - xlo) + coupling * c_ext;
  const double mid = V.is_even() ? 0.0 : 0.5 * (xlo + xhi);
  if (V.is_even()) half_x = std::max(std::abs(xlo), std::abs(xhi)) + coupling * c_ext;
  half_x *= opts.margin;
  const double kx_tot = kx * opts.margin;
  const double c_half = c_ext * opts.margin;
  const double kc_tot = (kc + coupling * kx) * opts.margin;

  const std::size_t nx = points_for(2.0 * half_x, kx_tot, opts);
  const std::size_t nc = points_for(2.0 * c_half, kc_tot, opts);
  if (nx > opts.max_points || nc > opts.max_points) {
    std::ostringstream os;
    os << "advised grid " << nx << " x " << nc << " exceeds max_points " << opts.max_points;
    warn("grid.advisor_capped", os.str());
  }
  const AxisGrid mx = make_axis(mid - half_x, mid + half_x, std::min(nx, opts.max_points), AxisLabel::matter_x);
  const AxisGrid cx = make_axis(-c_half, c_half, std::min(nc, opts.max_points),
                                rescaled ? AxisLabel::cavity_Q : AxisLabel::cavity_q);
  return build_product_grid(mx, cx, p.hbar);
}

}  // namespace cavlab
