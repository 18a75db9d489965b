#include "cavlab/eigensolvers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <numbers>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "cavlab/errors.hpp"
#include "cavlab/fft.hpp"

namespace cavlab {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Multiplies a real field by f(T(k)) in momentum space.
void kinetic_filter(const GridOperator& op, double* v, const std::vector<double>& f) {
  const auto dims = op.shape();
  cvec spec(op.kinetic_half.size());
  fft::r2c(dims, v, spec.data());
  const double inv = 1.0 / static_cast<double>(op.dimension());
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= f[i] * inv;
  fft::c2r(dims, spec.data(), v);
}

// Two passes of classical Gram-Schmidt against the first `m` columns of V,
// then normalization. Returns the norm before normalization relative to the
// input norm.
double orthonormalize_against(const MatrixXd& V, Index m, Eigen::Ref<VectorXd> t) {
  const double n0 = t.norm();
  if (n0 == 0.0) return 0.0;
  double before = n0;
  for (int pass = 0; pass < 3 && m > 0; ++pass) {
    const VectorXd c = V.leftCols(m).transpose() * t;
    t.noalias() -= V.leftCols(m) * c;
    const double after = t.norm();
    // A pass that keeps most of the vector leaves it orthogonal to rounding.
    if (after > 0.5 * before) break;
    before = after;
  }
  const double n1 = t.norm();
  if (n1 > 0.0) t /= n1;
  return n1 / n0;
}

}  // namespace

EigenSolveResult dense_eigensolve(const GridOperator& op, std::size_t k) {
  const std::size_t n = op.dimension();
  if (k == 0 || k > n) throw InvalidArgument("dense_eigensolve: k must be in [1, dimension]");
  const MatrixXd H = op.dense();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
  EigenSolveResult r;
  const auto kk = static_cast<Index>(k);
  r.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + kk);
  r.vectors = es.eigenvectors().leftCols(kk);
  r.residuals.resize(k);
  for (Index i = 0; i < kk; ++i)
    r.residuals[static_cast<std::size_t>(i)] = (H * r.vectors.col(i) - r.values[static_cast<std::size_t>(i)] * r.vectors.col(i)).norm();
  r.converged = true;
  r.iterations = 1;
  return r;
}

namespace {

// Fast-diagonalization inverse of the separable reference, (H0 - theta)^-1,
// applied in the reference frame.
class SeparablePreconditioner {
 public:
  explicit SeparablePreconditioner(const GridOperator& op) : op_(op) {
    const auto& r = *op.reference;
    nx_ = op.grid.matter.n;
    nc_ = op.grid.cavity->n;
    rvec vx = r.vx, vc = r.vc;
    factor(r.tx, vx, nx_, Qx_, lx_);
    factor(r.tc, vc, nc_, Qc_, lc_);
    if (r.frame_potential.size() == nx_ * nc_) {
      // Hartree refinement: each factor sees the full potential averaged
      // over the other factor's ground state.
      for (int sweep = 0; sweep < 4; ++sweep) {
        for (std::size_t i = 0; i < nx_; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < nc_; ++j) s += Qc_(static_cast<Index>(j), 0) * Qc_(static_cast<Index>(j), 0) * r.frame_potential[i * nc_ + j];
          vx[i] = s;
        }
        factor(r.tx, vx, nx_, Qx_, lx_);
        for (std::size_t j = 0; j < nc_; ++j) vc[j] = 0.0;
        double emf = 0.0;
        for (std::size_t i = 0; i < nx_; ++i) {
          const double wi = Qx_(static_cast<Index>(i), 0) * Qx_(static_cast<Index>(i), 0);
          for (std::size_t j = 0; j < nc_; ++j) vc[j] += wi * r.frame_potential[i * nc_ + j];
          emf += wi * vx[i];
        }
        // vx already holds the mean field; remove it once from the cavity side.
        for (std::size_t j = 0; j < nc_; ++j) vc[j] -= emf;
        factor(r.tc, vc, nc_, Qc_, lc_);
      }
    }
    if (r.shear != 0.0) {
      const auto p = op.grid.momenta(0);
      const auto c = op.grid.momenta(1);
      const double cn = 0.8 * std::abs(c[nc_ / 2]);
      const double pn = 0.8 * std::abs(p[nx_ / 2]);
      const std::size_t h1 = nc_ / 2 + 1;
      low_.assign(nx_ * h1, false);
      for (std::size_t i = 0; i < nx_; ++i)
        for (std::size_t j = 0; j < h1; ++j)
          low_[i * h1 + j] = std::abs(c[j] + r.shear * p[i]) <= cn && std::abs(p[i]) <= pn && std::abs(c[j]) <= cn;
    }
  }

  double ground() const { return lx_[0] + lc_[0]; }

  void solve(double* v, double theta) const {
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(v, static_cast<Index>(nx_),
                                                                                        static_cast<Index>(nc_));
    MatrixXd B = Qx_.transpose() * A * Qc_;
    const double delta = delta_rel_ * std::max(1.0, std::abs(theta));
    for (Index i = 0; i < B.rows(); ++i)
      for (Index j = 0; j < B.cols(); ++j) {
        double d = lx_[i] + lc_[j] - theta;
        if (std::abs(d) < delta) d = d < 0.0 ? -delta : delta;
        B(i, j) /= d;
      }
    A = Qx_ * B * Qc_.transpose();
  }

  // Lowest product eigenvectors of the reference, mapped to the operator frame.
  std::vector<VectorXd> start_vectors(std::size_t count) const {
    std::vector<std::pair<double, std::pair<Index, Index>>> pairs;
    const Index cx = std::min<Index>(lx_.size(), static_cast<Index>(count));
    const Index cc = std::min<Index>(lc_.size(), static_cast<Index>(count));
    for (Index i = 0; i < cx; ++i)
      for (Index j = 0; j < cc; ++j) pairs.push_back({lx_[i] + lc_[j], {i, j}});
    std::sort(pairs.begin(), pairs.end());
    std::vector<VectorXd> out;
    for (std::size_t k = 0; k < std::min(count, pairs.size()); ++k) {
      const auto [i, j] = pairs[k].second;
      VectorXd v(static_cast<Index>(nx_ * nc_));
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(
          v.data(), static_cast<Index>(nx_), static_cast<Index>(nc_));
      A = Qx_.col(i) * Qc_.col(j).transpose();
      if (op_.reference->shear != 0.0) shear_rows(op_.grid, -op_.reference->shear, v.data());
      out.push_back(std::move(v));
    }
    return out;
  }

  void apply(double* v, double theta) const {
    const double shear = op_.reference->shear;
    if (shear == 0.0) {
      solve(v, theta);
      return;
    }
    // Momenta that the shear would push past the cavity Nyquist limit are
    // aliased in the reference frame; those get the kinetic-only inverse.
    const std::size_t n = op_.dimension();
    const std::size_t h = op_.kinetic_half.size();
    cvec spec(h), spec_hi(h);
    fft::r2c(op_.shape(), v, spec.data());
    const double inv = 1.0 / static_cast<double>(n);
    const double shift = std::max(theta - op_.potential_min(), 1e-3 * std::max(1.0, std::abs(theta)));
    for (std::size_t i = 0; i < h; ++i) {
      if (low_[i]) {
        spec[i] *= inv;
        spec_hi[i] = 0.0;
      } else {
        spec_hi[i] = spec[i] * (inv / (op_.kinetic_half[i] + shift));
        spec[i] = 0.0;
      }
    }
    fft::c2r(op_.shape(), spec.data(), v);
    shear_rows(op_.grid, shear, v);
    solve(v, theta);
    shear_rows(op_.grid, -shear, v);
    rvec hi(n);
    fft::c2r(op_.shape(), spec_hi.data(), hi.data());
    for (std::size_t i = 0; i < n; ++i) v[i] += hi[i];
  }

 private:
  static void factor(const rvec& t, const rvec& pot, std::size_t n, MatrixXd& Q, VectorXd& lam) {
    cvec half(n / 2 + 1);
    for (std::size_t j = 0; j < half.size(); ++j) half[j] = cplx(t[j], 0.0);
    rvec kern(n);
    fft::c2r({n}, half.data(), kern.data());
    MatrixXd H(static_cast<Index>(n), static_cast<Index>(n));
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        H(static_cast<Index>(i), static_cast<Index>(j)) = kern[(i + n - j) % n] * inv + (i == j ? pot[i] : 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (H + H.transpose()));
    Q = es.eigenvectors();
    lam = es.eigenvalues();
  }

  const GridOperator& op_;
  std::size_t nx_ = 0, nc_ = 0;
  MatrixXd Qx_, Qc_;
  VectorXd lx_, lc_;
  std::vector<bool> low_;
  double delta_rel_ = 1e-4;

};

// Finite-difference model of the operator in its own frame: the kinetic
// symbol is read back as a quadratic form a p^2 + 2 b p c + c c^2 and
// discretized with central differences, the potential is kept exactly.
// Factored once at a shift below the spectrum (positive definite), so it is
// independent of the Ritz value.
class SparseModel {
 public:
  explicit SparseModel(const GridOperator& op) : op_(op) {}

  bool quadratic_symbol() {
    const auto dims = op_.shape();
    const double dk0 = 2.0 * std::numbers::pi / op_.grid.matter.length();
    const auto& T = op_.kinetic;
    if (dims.size() == 1) {
      if (dims[0] < 8) return false;
      a_ = T[1] / (dk0 * dk0);
      return std::abs(T[2] - 4.0 * a_ * dk0 * dk0) <= 1e-9 * std::abs(T[2]) + 1e-300 && a_ > 0.0;
    }
    const std::size_t nc = dims[1];
    if (dims[0] < 8 || nc < 8) return false;
    const double dk1 = 2.0 * std::numbers::pi / op_.grid.cavity->length();
    a_ = T[1 * nc] / (dk0 * dk0);
    c_ = T[1] / (dk1 * dk1);
    b_ = 0.5 * (T[1 * nc + 1] - a_ * dk0 * dk0 - c_ * dk1 * dk1) / (dk0 * dk1);
    const double check = a_ * 4.0 * dk0 * dk0 + 2.0 * b_ * 2.0 * dk0 * 3.0 * dk1 + c_ * 9.0 * dk1 * dk1;
    if (std::abs(T[2 * nc + 3] - check) > 1e-9 * std::abs(check)) return false;
    return a_ > 0.0 && c_ > 0.0 && b_ * b_ <= a_ * c_;
  }

  // Squared correlation of the kinetic form; near 1 the stencil misses the
  // strongly sheared level sets.
  double shear_correlation() const { return a_ > 0.0 && c_ > 0.0 ? b_ * b_ / (a_ * c_) : 0.0; }

  bool factor(double sigma) {
    const auto dims = op_.shape();
    const std::size_t nx = dims[0], nc = dims.size() > 1 ? dims[1] : 1;
    const double hx = op_.grid.matter.dx();
    const double hc = dims.size() > 1 ? op_.grid.cavity->dx() : 1.0;
    // Kinetic a p^2 with p = -i d/dx (hbar already folded into the symbol).
    const double cx = a_ / (hx * hx), cc = c_ / (hc * hc), cxc = 2.0 * b_ / (4.0 * hx * hc);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * nx * nc);
    auto id = [nc](std::size_t i, std::size_t j) { return static_cast<int>(i * nc + j); };
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < nc; ++j) {
        const int r = id(i, j);
        trip.emplace_back(r, r, 2.0 * cx + (nc > 1 ? 2.0 * cc : 0.0) + op_.potential[i * nc + j] - sigma);
        if (i > 0) trip.emplace_back(r, id(i - 1, j), -cx);
        if (i + 1 < nx) trip.emplace_back(r, id(i + 1, j), -cx);
        if (nc == 1) continue;
        if (j > 0) trip.emplace_back(r, id(i, j - 1), -cc);
        if (j + 1 < nc) trip.emplace_back(r, id(i, j + 1), -cc);
        if (b_ == 0.0) continue;
        // 2 b p_x p_c -> -2 b d_x d_c with the central-difference product.
        if (i + 1 < nx && j + 1 < nc) trip.emplace_back(r, id(i + 1, j + 1), -cxc);
        if (i > 0 && j > 0) trip.emplace_back(r, id(i - 1, j - 1), -cxc);
        if (i + 1 < nx && j > 0) trip.emplace_back(r, id(i + 1, j - 1), cxc);
        if (i > 0 && j + 1 < nc) trip.emplace_back(r, id(i - 1, j + 1), cxc);
      }
    const auto N = static_cast<Index>(nx * nc);
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    ldlt_.compute(A);
    return ldlt_.info() == Eigen::Success && (ldlt_.vectorD().array() > 0.0).all();
  }

  void apply(double* v) const {
    Eigen::Map<VectorXd> x(v, static_cast<Index>(op_.dimension()));
    x = ldlt_.solve(VectorXd(x));
  }

 private:
  const GridOperator& op_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

// The operator of the reference frame on the same grid: separable kinetic
// symbol plus the full frame potential.
GridOperator frame_operator(const GridOperator& op) {
  const auto& r = *op.reference;
  GridOperator f = op;
  const std::size_t nx = op.grid.matter.n, nc = op.grid.cavity->n, h = nc / 2 + 1;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < nc; ++j) f.kinetic[i * nc + j] = r.tx[i] + r.tc[j];
    for (std::size_t j = 0; j < h; ++j) f.kinetic_half[i * h + j] = r.tx[i] + r.tc[j];
  }
  f.potential = r.frame_potential;
  f.reference->shear = 0.0;
  return f;
}

}  // namespace

EigenSolveResult davidson(const GridOperator& op, const DavidsonOptions& opts) {
  const std::size_t n = op.dimension();
  if (opts.k == 0) throw InvalidArgument("davidson: k must be >= 1");
  if (opts.k > n) throw InvalidArgument("davidson: k exceeds the dimension");
  const std::size_t nev = std::min(n, opts.k + opts.guard);
  std::size_t mmax = opts.max_subspace ? opts.max_subspace : std::max(5 * nev, nev + 48);
  mmax = std::min(mmax, n);
  if (mmax < nev + 1) mmax = std::min(n, nev + 1);
  const auto N = static_cast<Index>(n);

  if (opts.frame_seed && opts.initial.cols() == 0 && op.reference && op.reference->shear != 0.0 &&
      op.reference->frame_potential.size() == n) {
    const GridOperator frame = frame_operator(op);
    DavidsonOptions fo = opts;
    fo.frame_seed = false;
    fo.k = nev;
    fo.guard = opts.guard;
    if (fo.k + fo.guard > n) fo.guard = n - fo.k;
    const EigenSolveResult fr = davidson(frame, fo);
    DavidsonOptions mo = opts;
    mo.frame_seed = false;
    mo.initial = fr.vectors;
    for (Index j = 0; j < mo.initial.cols(); ++j) shear_rows(op.grid, -op.reference->shear, mo.initial.col(j).data());
    EigenSolveResult r = davidson(op, mo);
    r.matvecs += fr.matvecs;
    return r;
  }

  const double vmin = op.potential_min();
  const double vmax = op.potential_max();
  const double tmax = op.kinetic_max();

  std::optional<SeparablePreconditioner> fdm;
  if (op.reference && op.grid.cavity) fdm.emplace(op);
  std::optional<SparseModel> sparse(std::in_place, op);
  {
    bool ok = sparse->quadratic_symbol() && !(fdm && sparse->shear_correlation() > 0.9);
    if (ok) {
      // Lowered from a level estimate until the factorization is positive
      // definite.
      const double est = fdm ? fdm->ground() : vmin;
      double off = 0.5 * std::max(1.0, std::abs(est));
      ok = false;
      for (int tries = 0; tries < 40 && !ok; ++tries, off *= 2.0) ok = sparse->factor(est - off);
    }
    if (!ok) sparse.reset();
  }
  auto precondition = [&](double* v, double th) {
    if (sparse) sparse->apply(v);
    else fdm->apply(v, th);
  };

  MatrixXd V(N, static_cast<Index>(mmax));
  MatrixXd W(N, static_cast<Index>(mmax));
  MatrixXd G(static_cast<Index>(mmax), static_cast<Index>(mmax));
  Index m = 0;
  EigenSolveResult res;

  auto push = [&](const VectorXd& t) {
    V.col(m) = t;
    op.apply_real(V.col(m).data(), W.col(m).data());
    ++res.matvecs;
    // Symmetric Rayleigh matrix grows by one row and column.
    const VectorXd g = V.leftCols(m + 1).transpose() * W.col(m);
    G.block(0, m, m + 1, 1) = g;
    G.block(m, 0, 1, m + 1) = g.transpose();
    ++m;
  };

  // Start block: caller vectors or reference product states, then seeded
  // random vectors smoothed by imaginary-time steps.
  {
    std::mt19937_64 rng(opts.seed);
    std::vector<double> lowpass(op.kinetic_half.size());
    const double tau_t = 20.0 / std::max(tmax, 1e-300);
    for (std::size_t i = 0; i < lowpass.size(); ++i) lowpass[i] = std::exp(-tau_t * op.kinetic_half[i]);
    const double tau_v = 20.0 / std::max(vmax - vmin, 1e-300);
    VectorXd t(N);
    std::vector<VectorXd> seeds;
    for (Index j = 0; j < opts.initial.cols(); ++j) seeds.push_back(opts.initial.col(j));
    if (seeds.empty() && fdm) seeds = fdm->start_vectors(nev);
    for (const auto& s0 : seeds) {
      t = s0;
      if (orthonormalize_against(V, m, t) > 1e-8) push(t);
    }
    std::size_t attempts = 0;
    while (static_cast<std::size_t>(m) < nev && attempts < 4 * nev + 16) {
      ++attempts;
      for (Index i = 0; i < N; ++i) t[i] = 2.0 * uniform(rng) - 1.0;
      for (int s = 0; s < 3; ++s) {
        kinetic_filter(op, t.data(), lowpass);
        for (Index i = 0; i < N; ++i) t[i] *= std::exp(-tau_v * (op.potential[static_cast<std::size_t>(i)] - vmin));
      }
      if (orthonormalize_against(V, m, t) < 1e-8) continue;
      push(t);
    }
    if (static_cast<std::size_t>(m) < nev) throw ConvergenceError("davidson: could not build a start block");
  }

  VectorXd theta;
  MatrixXd X, R, Xprev;
  std::vector<double> precond(op.kinetic_half.size());
  VectorXd t(N), u(N);
  const auto ne = static_cast<Index>(nev);

  for (std::size_t iter = 1; iter <= opts.max_iterations; ++iter) {
    res.iterations = iter;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G.topLeftCorner(m, m));
    theta = es.eigenvalues().head(ne);
    const MatrixXd Y = es.eigenvectors().leftCols(ne);
    X.noalias() = V.leftCols(m) * Y;
    R.noalias() = W.leftCols(m) * Y;
    R -= X * theta.asDiagonal();

    std::vector<Index> todo;
    bool wanted_done = true;
    res.residuals.assign(nev, 0.0);
    for (Index i = 0; i < ne; ++i) {
      const double rn = R.col(i).norm();
      res.residuals[static_cast<std::size_t>(i)] = rn;
      if (rn > opts.tol * std::max(1.0, std::abs(theta[i]))) {
        todo.push_back(i);
        if (static_cast<std::size_t>(i) < opts.k) wanted_done = false;
      }
    }
    if (wanted_done) {
      res.converged = true;
      break;
    }

    // Thick restart onto the current and previous Ritz blocks (GD+k): the
    // previous block carries the search direction across the restart.
    if (static_cast<std::size_t>(m) + todo.size() > mmax) {
      MatrixXd keep(N, Xprev.cols() > 0 ? 2 * ne : ne);
      keep.leftCols(ne) = X;
      if (Xprev.cols() > 0) keep.rightCols(ne) = Xprev;
      m = 0;
      for (Index j = 0; j < keep.cols(); ++j) {
        t = keep.col(j);
        if (orthonormalize_against(V, m, t) < 1e-7) continue;
        push(t);
      }
    }
    Xprev = X;

    for (Index i : todo) {
      if (static_cast<std::size_t>(m) >= mmax) break;
      t = R.col(i);
      if (sparse || fdm) {
        // Olsen correction: t = M^-1 r - a M^-1 x with a chosen so t is
        // M-orthogonal to x; avoids stagnation when M is nearly exact.
        precondition(t.data(), theta[i]);
        u = X.col(i);
        precondition(u.data(), theta[i]);
        const double den = X.col(i).dot(u);
        if (std::abs(den) > 1e-300) t -= (X.col(i).dot(t) / den) * u;
      } else {
        const double shift = std::max(theta[i] - vmin, 1e-3 * std::max(1.0, std::abs(theta[i])));
        for (std::size_t j = 0; j < precond.size(); ++j) precond[j] = 1.0 / (op.kinetic_half[j] + shift);
        kinetic_filter(op, t.data(), precond);
      }
      if (orthonormalize_against(V, m, t) < 1e-7) continue;
      push(t);
    }
  }

  const auto kk = static_cast<Index>(opts.k);
  res.values.assign(theta.data(), theta.data() + kk);
  res.vectors = X.leftCols(kk);
  for (Index j = 0; j < kk; ++j) res.vectors.col(j).normalize();
  res.residuals.resize(opts.k);
  return res;
}

}  // namespace cavlab
