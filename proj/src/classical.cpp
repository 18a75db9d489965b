#include "cavlab/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "cavlab/errors.hpp"

namespace cavlab {

namespace {

using State = std::vector<double>;

// Substep weights of the composition schemes, applied to leapfrog.
std::vector<double> composition(int order) {
  if (order == 2) return {1.0};
  const auto triple = [](const std::vector<double>& inner, int p) {
    const double c = std::pow(2.0, 1.0 / (p + 1));
    const double w1 = 1.0 / (2.0 - c), w0 = -c / (2.0 - c);
    std::vector<double> out;
    for (double w : {w1, w0, w1})
      for (double v : inner) out.push_back(w * v);
    return out;
  };
  if (order == 4) return triple({1.0}, 2);
  if (order == 6) return triple(triple({1.0}, 2), 4);
  throw InvalidArgument("integrator order must be 2, 4 or 6 (got " + std::to_string(order) + ")");
}

std::string dump(const State& s) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s[i];
  os << "]";
  return os.str();
}

void checked_force(const ClassicalSystem& sys, const State& s, double* f) {
  sys.force(s.data(), f);
  for (std::size_t i = 0; i < sys.dimension(); ++i)
    if (!std::isfinite(f[i])) throw ConvergenceError("non-finite force at state " + dump(s));
}

// One leapfrog substep of size h for the state and any tangent vectors.
void leapfrog(const ClassicalSystem& sys, State& s, std::vector<State>* tangents, double h) {
  const std::size_t d = sys.dimension();
  const double m = sys.mass();
  double f[2], hs[4];
  checked_force(sys, s, f);
  if (tangents) sys.hessian(s.data(), hs);
  for (std::size_t i = 0; i < d; ++i) s[d + i] += 0.5 * h * f[i];
  if (tangents)
    for (auto& w : *tangents)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) w[d + i] -= 0.5 * h * hs[i * d + j] * w[j];
  for (std::size_t i = 0; i < d; ++i) s[i] += h * s[d + i] / m;
  if (tangents)
    for (auto& w : *tangents)
      for (std::size_t i = 0; i < d; ++i) w[i] += h * w[d + i] / m;
  checked_force(sys, s, f);
  if (tangents) sys.hessian(s.data(), hs);
  for (std::size_t i = 0; i < d; ++i) s[d + i] += 0.5 * h * f[i];
  if (tangents)
    for (auto& w : *tangents)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) w[d + i] -= 0.5 * h * hs[i * d + j] * w[j];
}

void composed_step(const ClassicalSystem& sys, State& s, std::vector<State>* tangents, double dt,
                   const std::vector<double>& weights) {
  for (double w : weights) leapfrog(sys, s, tangents, w * dt);
}

void check_state(const ClassicalSystem& sys, const State& s) {
  if (s.size() != 2 * sys.dimension())
    throw InvalidArgument("state has " + std::to_string(s.size()) + " entries, expected " +
                          std::to_string(2 * sys.dimension()));
}

bool escaped(const ClassicalSystem& sys, const State& s) {
  const double r = sys.escape_energy();
  if (!std::isfinite(r)) return false;
  double q2 = 0.0;
  for (std::size_t i = 0; i < sys.dimension(); ++i) q2 += s[i] * s[i];
  // Beyond a few well radii the trajectory has left through a saddle.
  return q2 > 96.0 * r;
}

double norm(const State& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return std::sqrt(s);
}

void normalize(State& w) {
  const double n = norm(w);
  for (double& v : w) v /= n;
}

}  // namespace

ClassicalSystem ClassicalSystem::one_d(PotentialModel V, double mass) {
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  ClassicalSystem s;
  s.dim_ = 1;
  s.mass_ = mass;
  s.v1_ = std::move(V);
  return s;
}

ClassicalSystem ClassicalSystem::henon_heiles(double lambda, double mass) {
  if (!(mass > 0.0) || !(lambda > 0.0)) throw InvalidArgument("Henon-Heiles needs positive mass and lambda");
  ClassicalSystem s;
  s.dim_ = 2;
  s.mass_ = mass;
  s.hh_ = HenonHeiles{lambda};
  return s;
}

ClassicalSystem ClassicalSystem::harmonic_2d(double wx, double wy, double mass) {
  if (!(mass > 0.0) || !(wx > 0.0) || !(wy > 0.0)) throw InvalidArgument("harmonic_2d needs positive parameters");
  ClassicalSystem s;
  s.dim_ = 2;
  s.mass_ = mass;
  s.h2_ = Harmonic2D{wx, wy};
  return s;
}

std::string ClassicalSystem::kind() const {
  if (v1_) return "1d:" + v1_->kind();
  if (hh_) return "henon_heiles";
  return "harmonic_2d";
}

double ClassicalSystem::potential(const double* q) const {
  if (v1_) return v1_->eval(q[0]);
  const double x = q[0], y = q[1];
  if (hh_) return 0.5 * (x * x + y * y) + hh_->lambda * (x * x * y - y * y * y / 3.0);
  return 0.5 * mass_ * (h2_->wx * h2_->wx * x * x + h2_->wy * h2_->wy * y * y);
}

void ClassicalSystem::force(const double* q, double* f) const {
  if (v1_) {
    f[0] = -v1_->derivative(q[0]);
    return;
  }
  const double x = q[0], y = q[1];
  if (hh_) {
    const double l = hh_->lambda;
    f[0] = -(x + 2.0 * l * x * y);
    f[1] = -(y + l * (x * x - y * y));
    return;
  }
  f[0] = -mass_ * h2_->wx * h2_->wx * x;
  f[1] = -mass_ * h2_->wy * h2_->wy * y;
}

void ClassicalSystem::hessian(const double* q, double* h) const {
  if (v1_) {
    h[0] = v1_->second_derivative(q[0]);
    return;
  }
  if (hh_) {
    const double l = hh_->lambda;
    h[0] = 1.0 + 2.0 * l * q[1];
    h[1] = h[2] = 2.0 * l * q[0];
    h[3] = 1.0 - 2.0 * l * q[1];
    return;
  }
  h[0] = mass_ * h2_->wx * h2_->wx;
  h[1] = h[2] = 0.0;
  h[3] = mass_ * h2_->wy * h2_->wy;
}

double ClassicalSystem::energy(const State& s) const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += s[dim_ + i] * s[dim_ + i];
  return 0.5 * t / mass_ + potential(s.data());
}

double ClassicalSystem::escape_energy() const {
  if (hh_) return 1.0 / (6.0 * hh_->lambda * hh_->lambda);
  return std::numeric_limits<double>::infinity();
}

std::string to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::regular: return "regular";
    case OrbitClass::chaotic: return "chaotic";
    case OrbitClass::indeterminate: return "indeterminate";
    case OrbitClass::escaped: return "escaped";
  }
  return "unknown";
}

void symplectic_step(const ClassicalSystem& sys, State& state, double dt, int order) {
  check_state(sys, state);
  composed_step(sys, state, nullptr, dt, composition(order));
}

Trajectory integrate(const ClassicalSystem& sys, const State& initial, double dt, std::size_t n_steps, int order,
                     std::size_t record_every) {
  check_state(sys, initial);
  if (!(dt != 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be finite and nonzero");
  const auto weights = composition(order);
  Trajectory tr;
  State s = initial;
  const double e0 = sys.energy(s);
  tr.initial_energy = e0;
  const double scale = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
  const std::size_t window = std::max<std::size_t>(1, n_steps / 100);
  double head = 0.0, tail = 0.0;
  std::size_t nh = 0, nt = 0;
  tr.times.push_back(0.0);
  tr.states.push_back(s);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    composed_step(sys, s, nullptr, dt, weights);
    const double err = (sys.energy(s) - e0) / scale;
    if (!std::isfinite(err)) throw ConvergenceError("non-finite energy at state " + dump(s));
    tr.max_energy_error = std::max(tr.max_energy_error, std::abs(err));
    if (k <= window) head += err, ++nh;
    if (k + window > n_steps) tail += err, ++nt;
    if ((record_every && k % record_every == 0) || k == n_steps) {
      if (tr.times.back() != dt * static_cast<double>(k)) {
        tr.times.push_back(dt * static_cast<double>(k));
        tr.states.push_back(s);
      }
    }
  }
  if (nh && nt) tr.secular_drift = std::abs(tail / static_cast<double>(nt) - head / static_cast<double>(nh));
  return tr;
}

Eigen::MatrixXd monodromy(const ClassicalSystem& sys, const State& initial, double dt, std::size_t n_steps,
                          int order) {
  check_state(sys, initial);
  const std::size_t n = 2 * sys.dimension();
  const auto weights = composition(order);
  State s = initial;
  std::vector<State> w(n, State(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) w[i][i] = 1.0;
  for (std::size_t k = 0; k < n_steps; ++k) composed_step(sys, s, &w, dt, weights);
  Eigen::MatrixXd M(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[c][r];
  return M;
}

double symplectic_defect(const Eigen::MatrixXd& M) {
  const Eigen::Index n = M.rows(), d = n / 2;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  J.topRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
  J.bottomLeftCorner(d, d) = -Eigen::MatrixXd::Identity(d, d);
  return (M.transpose() * J * M - J).cwiseAbs().maxCoeff();
}

SaliResult sali(const ClassicalSystem& sys, const State& initial, const SaliOptions& opts) {
  check_state(sys, initial);
  const std::size_t n = 2 * sys.dimension();
  if (n < 4) throw InvalidArgument("SALI needs a system with at least two degrees of freedom");
  const auto weights = composition(opts.order);
  State s = initial;
  // Two fixed, non-parallel start directions keep the result reproducible.
  std::vector<State> w(2, State(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    w[0][i] = 1.0 / std::sqrt(static_cast<double>(n));
    w[1][i] = (i % 2 ? -1.0 : 1.0) * (1.0 + 0.5 * static_cast<double>(i));
  }
  normalize(w[0]);
  normalize(w[1]);
  SaliResult r;
  r.min_sali = std::numeric_limits<double>::infinity();
  const std::size_t steps = static_cast<std::size_t>(std::ceil(opts.t_max / opts.dt));
  double value = 1.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    composed_step(sys, s, &w, opts.dt, weights);
    if (escaped(sys, s)) {
      r.orbit = OrbitClass::escaped;
      r.time = opts.dt * static_cast<double>(k);
      r.final_sali = value;
      return r;
    }
    normalize(w[0]);
    normalize(w[1]);
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      plus += (w[0][i] + w[1][i]) * (w[0][i] + w[1][i]);
      minus += (w[0][i] - w[1][i]) * (w[0][i] - w[1][i]);
    }
    value = std::sqrt(std::min(plus, minus));
    r.min_sali = std::min(r.min_sali, value);
    if (value < opts.chaotic_threshold) {
      r.orbit = OrbitClass::chaotic;
      r.final_sali = value;
      r.time = opts.dt * static_cast<double>(k);
      return r;
    }
  }
  r.final_sali = value;
  r.time = opts.dt * static_cast<double>(steps);
  r.orbit = value > opts.regular_threshold ? OrbitClass::regular : OrbitClass::indeterminate;
  return r;
}

State state_on_section(const ClassicalSystem& sys, double energy, double q, double p, const SectionSpec& spec) {
  if (sys.dimension() != 2) throw InvalidArgument("Poincare sections need a two-dimensional system");
  if (spec.axis > 1) throw InvalidArgument("section axis must be 0 or 1");
  const std::size_t a = spec.axis, o = 1 - spec.axis;
  State s(4, 0.0);
  s[o] = q;
  s[2 + o] = p;
  const double pa2 = 2.0 * sys.mass() * (energy - sys.potential(s.data())) - p * p;
  if (pa2 < 0.0) throw InvalidArgument("seed (" + std::to_string(q) + ", " + std::to_string(p) +
                                       ") is outside the accessible region at this energy");
  s[2 + a] = std::sqrt(pa2);
  return s;
}

namespace {

// Henon's trick: integrate dt/ds, dq/ds, dp/ds with s = q[a] from its current
// value to 0 using RK4 substeps.
void henon_to_plane(const ClassicalSystem& sys, State& s, std::size_t a) {
  const double m = sys.mass();
  auto rhs = [&](const State& y, State& dy) {
    double f[2];
    sys.force(y.data(), f);
    const double inv = 1.0 / (y[2 + a] / m);  // dt/ds
    for (std::size_t i = 0; i < 2; ++i) {
      dy[i] = (y[2 + i] / m) * inv;
      dy[2 + i] = f[i] * inv;
    }
  };
  const int sub = 4;
  const double h = -s[a] / sub;
  State k1(4), k2(4), k3(4), k4(4), t(4);
  for (int i = 0; i < sub; ++i) {
    rhs(s, k1);
    for (int j = 0; j < 4; ++j) t[j] = s[j] + 0.5 * h * k1[j];
    rhs(t, k2);
    for (int j = 0; j < 4; ++j) t[j] = s[j] + 0.5 * h * k2[j];
    rhs(t, k3);
    for (int j = 0; j < 4; ++j) t[j] = s[j] + h * k3[j];
    rhs(t, k4);
    for (int j = 0; j < 4; ++j) s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
}

}  // namespace

PoincareSection poincare_section(const ClassicalSystem& sys, double energy,
                                 const std::vector<std::pair<double, double>>& seeds, const SectionSpec& spec,
                                 const SectionOptions& opts) {
  PoincareSection out;
  out.spec = spec;
  out.energy = energy;
  const std::size_t a = spec.axis, o = 1 - spec.axis;
  const auto weights = composition(opts.order);
  for (std::size_t id = 0; id < seeds.size(); ++id) {
    State s = state_on_section(sys, energy, seeds[id].first, seeds[id].second, spec);
    SectionPoint first;
    first.q = s[o];
    first.p = s[2 + o];
    first.seed = id;
    out.points.push_back(first);
    std::size_t found = 1;
    bool esc = false;
    for (std::size_t k = 0; k < opts.max_steps && found < opts.crossings; ++k) {
      const double before = s[a];
      composed_step(sys, s, nullptr, opts.dt, weights);
      if (escaped(sys, s)) {
        esc = true;
        break;
      }
      if (before < 0.0 && s[a] >= 0.0 && s[2 + a] > 0.0) {
        State c = s;
        henon_to_plane(sys, c, a);
        SectionPoint pt;
        pt.q = c[o];
        pt.p = c[2 + o];
        pt.seed = id;
        pt.residual = std::abs(c[a]);
        out.points.push_back(pt);
        ++found;
      }
    }
    out.escaped.push_back(esc);
  }
  return out;
}

std::pair<double, double> section_interval(const ClassicalSystem& sys, double energy, const SectionSpec& spec) {
  if (sys.dimension() != 2) throw InvalidArgument("section planes need a two-dimensional system");
  const std::size_t o = 1 - spec.axis;
  const double step = 1e-3;
  auto v_at = [&](double c) {
    double q[2] = {0.0, 0.0};
    q[o] = c;
    return sys.potential(q);
  };
  if (v_at(0.0) > energy) throw InvalidArgument("no accessible region on the section plane at this energy");
  double lo = 0.0, hi = 0.0;
  while (v_at(lo - step) <= energy && lo > -100.0) lo -= step;
  while (v_at(hi + step) <= energy && hi < 100.0) hi += step;
  return {lo - step, hi + step};
}

ChaoticFraction chaotic_fraction(const ClassicalSystem& sys, double energy, std::size_t n_seeds,
                                 const FractionOptions& opts) {
  if (sys.dimension() != 2) throw InvalidArgument("chaotic_fraction needs a two-dimensional system");
  if (n_seeds == 0) throw InvalidArgument("chaotic_fraction needs at least one seed");
  const auto [lo, hi] = section_interval(sys, energy, opts.section);
  double q0[2] = {0.0, 0.0};
  const double vmin = sys.potential(q0);
  const double pmax = std::sqrt(2.0 * sys.mass() * (energy - vmin));

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uq(lo, hi), up(-pmax, pmax);
  ChaoticFraction out;
  std::vector<int> labels;  // 1 chaotic, 0 regular
  std::size_t attempts = 0;
  while (out.seeds.size() < n_seeds) {
    if (++attempts > 1000 * n_seeds) throw InvalidArgument("seed rejection sampling failed");
    const double q = uq(rng), p = up(rng);
    State s;
    try {
      s = state_on_section(sys, energy, q, p, opts.section);
    } catch (const InvalidArgument&) {
      continue;
    }
    out.seeds.emplace_back(q, p);
    const SaliResult r = sali(sys, s, opts.sali);
    out.classes.push_back(r.orbit);
    switch (r.orbit) {
      case OrbitClass::chaotic: ++out.chaotic, labels.push_back(1); break;
      case OrbitClass::regular: ++out.regular, labels.push_back(0); break;
      case OrbitClass::indeterminate: ++out.indeterminate; break;
      case OrbitClass::escaped: ++out.escaped; break;
    }
  }
  if (labels.empty()) return out;
  const double nl = static_cast<double>(labels.size());
  out.fraction = static_cast<double>(out.chaotic) / nl;
  std::mt19937_64 brng(opts.seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t b = 0; b < opts.bootstrap; ++b) {
    double c = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) c += labels[pick(brng)];
    const double f = c / nl;
    s1 += f;
    s2 += f * f;
  }
  if (opts.bootstrap > 1) {
    const double B = static_cast<double>(opts.bootstrap);
    out.uncertainty = std::sqrt(std::max(0.0, (s2 - s1 * s1 / B) / (B - 1.0)));
  }
  return out;
}

std::vector<std::pair<double, double>> convex_hull(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  const auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0.0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

double polygon_area(const std::vector<std::pair<double, double>>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.first * q.second - q.first * p.second;
  }
  return 0.5 * std::abs(a);
}

IslandArea island_area(const PoincareSection& s, const std::vector<std::size_t>& seeds, double max_gap) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : s.points)
    if (std::find(seeds.begin(), seeds.end(), p.seed) != seeds.end()) pts.emplace_back(p.q, p.p);
  if (pts.size() < 8) throw InvalidArgument("island selection has too few section points to close");
  double cq = 0.0, cp = 0.0;
  for (const auto& p : pts) cq += p.first, cp += p.second;
  cq /= static_cast<double>(pts.size());
  cp /= static_cast<double>(pts.size());
  std::vector<double> ang;
  for (const auto& p : pts) ang.push_back(std::atan2(p.second - cp, p.first - cq));
  std::sort(ang.begin(), ang.end());
  double gap = ang.front() + 2.0 * std::numbers::pi - ang.back();
  for (std::size_t i = 1; i < ang.size(); ++i) gap = std::max(gap, ang[i] - ang[i - 1]);
  if (gap > max_gap)
    throw InvalidArgument("island is not closed within the section data (largest angular gap " +
                          std::to_string(gap) + " rad)");
  IslandArea r;
  r.max_angular_gap = gap;
  r.area = polygon_area(convex_hull(pts));
  std::vector<std::pair<double, double>> half;
  for (std::size_t i = 0; i < pts.size(); i += 2) half.push_back(pts[i]);
  r.uncertainty = std::abs(r.area - polygon_area(convex_hull(half)));
  return r;
}

StateCount island_state_count(const IslandArea& a, double hbar_eff) {
  if (!(hbar_eff > 0.0)) throw InvalidArgument("hbar_eff must be positive");
  const double cell = 2.0 * std::numbers::pi * hbar_eff;
  return {a.area / cell, a.uncertainty / cell};
}

StateCount island_state_count(const PoincareSection& s, const std::vector<std::size_t>& seeds, double hbar_eff) {
  return island_state_count(island_area(s, seeds), hbar_eff);
}

TrajectoryEnsembleRecord run_ensemble(const ClassicalSystem& sys, const WignerGaussian& init,
                                      const EnsembleOptions& opts) {
  if (sys.dimension() != 1) throw InvalidArgument("run_ensemble supports one-dimensional systems");
  if (!(init.sigma > 0.0) || !(init.hbar > 0.0)) throw InvalidArgument("Wigner sampling needs sigma, hbar > 0");
  if (opts.samples == 0) throw InvalidArgument("ensemble needs at least one sample");
  const auto weights = composition(opts.order);
  const std::size_t every = std::max<std::size_t>(1, opts.record_every);
  const std::size_t nrec = opts.n_steps / every + 1;
  TrajectoryEnsembleRecord rec;
  const double sp = init.hbar / (2.0 * init.sigma);
  std::ostringstream os;
  os.precision(17);
  os << (opts.moment_matched ? "wigner_gaussian_moment_matched" : "wigner_gaussian") << " x0=" << init.x0 << " p0=" << init.p0 << " sigma_x=" << init.sigma << " sigma_p=" << sp
     << " seed=" << opts.seed;
  rec.sampling = os.str();
  rec.samples = opts.samples;
  for (std::size_t r = 0; r < nrec; ++r) rec.times.push_back(opts.dt * static_cast<double>(r * every));
  std::vector<double> sx(nrec, 0.0), sxx(nrec, 0.0), spp(nrec, 0.0), spq(nrec, 0.0);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gx(init.x0, init.sigma), gp(init.p0, sp);
  std::vector<std::pair<double, double>> starts(opts.samples);
  for (auto& s0 : starts) {
    s0.first = gx(rng);
    s0.second = gp(rng);
  }
  if (opts.moment_matched && opts.samples > 2) {
    // Affine map of the sample onto the exact first and second moments
    // (zero x-p correlation) of the Wigner Gaussian.
    const double n = static_cast<double>(opts.samples);
    double mx = 0.0, mp = 0.0;
    for (const auto& s0 : starts) mx += s0.first, mp += s0.second;
    mx /= n;
    mp /= n;
    double cxx = 0.0, cxp = 0.0, cpp = 0.0;
    for (const auto& s0 : starts) {
      const double a = s0.first - mx, b = s0.second - mp;
      cxx += a * a, cxp += a * b, cpp += b * b;
    }
    cxx /= n, cxp /= n, cpp /= n;
    // Whiten with the Cholesky factor, then scale to (sigma, sp).
    const double l11 = std::sqrt(cxx), l21 = cxp / l11, l22 = std::sqrt(cpp - l21 * l21);
    for (auto& s0 : starts) {
      const double a = (s0.first - mx) / l11;
      const double b = (s0.second - mp - l21 * a) / l22;
      s0.first = init.x0 + init.sigma * a;
      s0.second = init.p0 + sp * b;
    }
  }
  // Moments are accumulated about the sample-independent centre (x0, p0) in
  // sample order, so the reduction is fixed regardless of scheduling.
  for (const auto& s0 : starts) {
    State s{s0.first, s0.second};
    const double e0 = sys.energy(s);
    const double scale = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
    double worst = 0.0;
    std::size_t r = 0;
    for (std::size_t k = 0; k <= opts.n_steps; ++k) {
      if (k) composed_step(sys, s, nullptr, opts.dt, weights);
      if (k % every == 0) {
        const double dx = s[0] - init.x0, dp = s[1] - init.p0;
        sx[r] += dx;
        sxx[r] += dx * dx;
        spq[r] += dp;
        spp[r] += dp * dp;
        ++r;
        worst = std::max(worst, std::abs(sys.energy(s) - e0) / scale);
      }
    }
    rec.max_energy_drift = std::max(rec.max_energy_drift, worst);
    if (worst > opts.energy_tolerance) ++rec.drift_violations;
  }
  const double n = static_cast<double>(opts.samples);
  // A moment-matched sample is the distribution itself; a raw sample gets
  // the unbiased estimator.
  const bool matched = opts.moment_matched && opts.samples > 2;
  const double bessel = !matched && opts.samples > 1 ? n / (n - 1.0) : 1.0;
  for (std::size_t r = 0; r < nrec; ++r) {
    const double mx = sx[r] / n, mp = spq[r] / n;
    rec.mean_x.push_back(init.x0 + mx);
    rec.var_x.push_back((sxx[r] / n - mx * mx) * bessel);
    rec.mean_p.push_back(init.p0 + mp);
    rec.var_p.push_back((spp[r] / n - mp * mp) * bessel);
  }
  return rec;
}

}  // namespace cavlab
