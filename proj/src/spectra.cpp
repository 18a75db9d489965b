#include "cavlab/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "cavlab/errors.hpp"
#include "cavlab/fft.hpp"

namespace cavlab {

std::string to_string(EigenMethod m) {
  switch (m) {
    case EigenMethod::automatic: return "auto";
    case EigenMethod::dense: return "dense";
    case EigenMethod::krylov: return "krylov";
  }
  return "?";
}

EigenMethod eigen_method_from_string(const std::string& s) {
  if (s == "auto") return EigenMethod::automatic;
  if (s == "dense") return EigenMethod::dense;
  if (s == "krylov") return EigenMethod::krylov;
  throw InvalidArgument("unknown eigen method '" + s + "' (expected auto, dense or krylov)");
}

SpectrumResult eigen(const GridOperator& op, const EigenOptions& opts) {
  if (opts.k == 0) throw InvalidArgument("eigen: k must be >= 1");
  if (opts.k > op.dimension()) throw InvalidArgument("eigen: k exceeds the grid dimension");
  EigenMethod m = opts.method;
  if (m == EigenMethod::automatic) m = op.dimension() <= opts.dense_threshold ? EigenMethod::dense : EigenMethod::krylov;

  EigenSolveResult es;
  if (m == EigenMethod::dense) {
    es = dense_eigensolve(op, opts.k);
  } else {
    DavidsonOptions d;
    d.k = opts.k;
    d.tol = opts.tol;
    d.seed = opts.seed;
    d.max_iterations = opts.max_iterations;
    es = davidson(op, d);
    if (!es.converged) {
      std::ostringstream os;
      os << "krylov eigensolver did not converge after " << es.iterations << " iterations; best residuals:";
      for (double r : es.residuals) os << ' ' << r;
      throw ConvergenceError(os.str());
    }
  }

  SpectrumResult r;
  r.eigenvalues = es.values;
  r.residual_norms = es.residuals;
  r.method = m;
  r.converged = es.converged;
  r.iterations = es.iterations;
  r.matvecs = es.matvecs;
  r.gauge = op.gauge;
  r.epsilon = op.physical.epsilon;
  r.grid = op.grid;
  if (opts.want_vectors) {
    const double s = 1.0 / std::sqrt(op.grid.cell_volume());
    for (Eigen::Index j = 0; j < es.vectors.cols(); ++j) {
      WaveField w(op.grid);
      for (std::size_t i = 0; i < w.size(); ++i) w.data[i] = cplx(es.vectors(static_cast<Eigen::Index>(i), j) * s, 0.0);
      r.eigenvectors.push_back(std::move(w));
    }
  }
  return r;
}

ProductGrid refine_grid(const ProductGrid& g, const CertificationOptions& c) {
  auto scale = [&](const AxisGrid& a) {
    const double mid = 0.5 * (a.x_min + a.x_max);
    const double half = 0.5 * a.length() * c.extent_factor;
    const auto n = fft::next_fast_size(
        static_cast<std::size_t>(std::ceil(static_cast<double>(a.n) * c.points_factor)), true);
    return make_axis(mid - half, mid + half, n, a.label);
  };
  if (g.cavity) return build_product_grid(scale(g.matter), scale(*g.cavity), g.hbar);
  return build_matter_grid(scale(g.matter), g.hbar);
}

SpectrumResult certified_eigen(const OperatorFactory& make, const ProductGrid& grid, const EigenOptions& opts,
                               const CertificationOptions& cert) {
  SpectrumResult base = eigen(make(grid), opts);
  EigenOptions ropts = opts;
  ropts.want_vectors = false;
  const ProductGrid fine = refine_grid(grid, cert);
  const SpectrumResult ref = eigen(make(fine), ropts);
  double worst = 0.0;
  for (std::size_t i = 0; i < base.eigenvalues.size(); ++i) {
    const double e = base.eigenvalues[i];
    const double rel = std::abs(ref.eigenvalues[i] - e) / std::max(std::abs(e), 1e-12);
    worst = std::max(worst, rel);
  }
  std::ostringstream os;
  os << "refined grid: extent x" << cert.extent_factor << ", points x" << cert.points_factor
     << " per axis; pass if max relative eigenvalue change < " << cert.tolerance;
  base.certification.performed = true;
  base.certification.tolerance = cert.tolerance;
  base.certification.max_relative_change = worst;
  base.certification.passed = worst < cert.tolerance;
  base.certification.refined_grid = fine;
  base.certification.protocol = os.str();
  return base;
}

std::vector<double> NormalModeOracle::levels(std::size_t count) const {
  std::vector<double> out;
  const std::size_t n = count + 1;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      out.push_back(hbar * (omega_plus * (static_cast<double>(a) + 0.5) + omega_minus * (static_cast<double>(b) + 0.5)));
  std::sort(out.begin(), out.end());
  out.resize(count);
  return out;
}

NormalModeOracle normal_mode_oracle(const PhysicalParams& p, double omega0) {
  validate(p);
  if (!std::isfinite(omega0) || omega0 <= 0.0)
    throw InvalidArgument("normal_mode_oracle: omega0 must be positive (quadratic form not positive definite)");
  const double s = dressed_params(p).varsigma;
  const double m = p.m;
  Eigen::Matrix2d K;
  K << 1.0 / m, s / m, s / m, s * s / m + 1.0;
  Eigen::Matrix2d U = Eigen::Matrix2d::Zero();
  U(0, 0) = m * omega0 * omega0;
  U(1, 1) = p.omega * p.omega;

  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  A.topLeftCorner<2, 2>() = U;
  A.bottomRightCorner<2, 2>() = K;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> pd(A);
  if (pd.eigenvalues().minCoeff() <= 0.0)
    throw InvalidArgument("normal_mode_oracle: quadratic Hamiltonian is not positive definite");

  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  J.topRightCorner<2, 2>() = Eigen::Matrix2d::Identity();
  J.bottomLeftCorner<2, 2>() = -Eigen::Matrix2d::Identity();
  Eigen::EigenSolver<Eigen::Matrix4d> flow(J * A);
  std::vector<double> w;
  for (int i = 0; i < 4; ++i) {
    const double im = flow.eigenvalues()[i].imag();
    if (im > 0.0) w.push_back(im);
  }
  if (w.size() != 2) throw InvalidArgument("normal_mode_oracle: flow does not have two oscillatory modes");
  std::sort(w.begin(), w.end());

  NormalModeOracle o;
  o.omega_minus = w[0];
  o.omega_plus = w[1];
  o.hbar = p.hbar;

  Eigen::EigenSolver<Eigen::Matrix2d> red(K * U);
  std::vector<double> w2{std::sqrt(red.eigenvalues()[0].real()), std::sqrt(red.eigenvalues()[1].real())};
  std::sort(w2.begin(), w2.end());
  o.reduction_mismatch = std::max(std::abs(w2[0] - w[0]) / w[0], std::abs(w2[1] - w[1]) / w[1]);
  return o;
}

PolaritonSplitting polariton_splitting(const SpectrumResult& r, const PhysicalParams& p, double omega0) {
  if (r.eigenvalues.size() < 3) throw InvalidArgument("polariton_splitting needs the lowest 3 levels");
  const double e0 = r.eigenvalues[0], e1 = r.eigenvalues[1], e2 = r.eigenvalues[2];
  PolaritonSplitting s;
  s.value = e2 - e1;
  double res = 0.0;
  for (std::size_t i = 0; i < 3 && i < r.residual_norms.size(); ++i) res = std::max(res, r.residual_norms[i]);
  const double resolution = std::max(1e-9 * std::max(std::abs(e2), 1.0), 10.0 * res);
  if (std::abs(s.value) < resolution) {
    s.degenerate = true;
    s.note = "one-quantum levels degenerate within resolution";
  }
  const auto o = normal_mode_oracle(p, omega0);
  if (o.omega_plus > 2.0 * o.omega_minus + resolution / p.hbar || e2 - e0 > 2.0 * (e1 - e0) + resolution) {
    s.ambiguous = true;
    s.note = "third level is a two-quantum state of the lower mode";
  }
  return s;
}

GaugeAudit gauge_audit(const PhysicalParams& p, const PotentialModel& V, const GaugeAuditOptions& opts) {
  GaugeAudit a;
  a.physical = p;
  a.tolerance = opts.tolerance;
  EigenOptions eo = opts.eigen;
  eo.k = opts.levels;
  auto run = [&](Gauge g) {
    const ProductGrid grid = advise_grid(g, p, V, opts.levels, opts.advisor);
    OperatorFactory make = [&, g](const ProductGrid& gr) {
      HamiltonianSpec spec{g, p, V, gr};
      return build_operator(spec);
    };
    if (opts.certify) return certified_eigen(make, grid, eo, opts.certification);
    return eigen(make(grid), eo);
  };
  a.mg = run(Gauge::MG);
  a.ag = run(Gauge::AG);
  for (std::size_t i = 0; i < opts.levels; ++i) {
    GaugeAuditRow row;
    row.level = i;
    row.mg = a.mg.eigenvalues[i];
    row.ag = a.ag.eigenvalues[i];
    row.relative_delta = std::abs(row.mg - row.ag) / std::max(std::abs(row.mg), 1e-12);
    a.max_relative_delta = std::max(a.max_relative_delta, row.relative_delta);
    a.rows.push_back(row);
  }
  a.passed = a.max_relative_delta < opts.tolerance &&
             (!opts.certify || (a.mg.certification.passed && a.ag.certification.passed));
  return a;
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumResult>& results) {
  os << "epsilon,level_index,energy,gauge,residual\n";
  char buf[160];
  for (const auto& r : results)
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
      const double res = i < r.residual_norms.size() ? r.residual_norms[i] : 0.0;
      std::snprintf(buf, sizeof(buf), "%.17g,%zu,%.17g,%s,%.6e\n", r.epsilon, i, r.eigenvalues[i],
                    to_string(r.gauge).c_str(), res);
      os << buf;
    }
}

}  // namespace cavlab
