#include "cavlab/potentials.hpp"

#include <cmath>
#include <limits>

#include "cavlab/errors.hpp"

namespace cavlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* msg) {
  if (!ok) throw InvalidArgument(msg);
}

double poly_eval(const std::vector<double>& c, double x, int deriv) {
  double s = 0.0;
  for (std::size_t k = c.size(); k-- > static_cast<std::size_t>(deriv);) {
    double coef = c[k];
    for (int d = 0; d < deriv; ++d) coef *= static_cast<double>(k - static_cast<std::size_t>(d));
    s = s * x + coef;
  }
  return s;
}

}  // namespace

PotentialModel::PotentialModel(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const Harmonic& h) {
                   require(std::isfinite(h.omega0) && h.omega0 > 0.0, "harmonic omega0 must be > 0");
                   require(std::isfinite(h.mass) && h.mass > 0.0, "harmonic mass must be > 0");
                 },
                 [](const QuarticDoubleWell& w) {
                   require(std::isfinite(w.barrier) && w.barrier > 0.0, "double well barrier must be > 0");
                   require(std::isfinite(w.a) && w.a > 0.0, "double well half-separation a must be > 0");
                 },
                 [](const Morse& m) {
                   require(std::isfinite(m.depth) && m.depth > 0.0, "morse depth must be > 0");
                   require(std::isfinite(m.alpha) && m.alpha > 0.0, "morse alpha must be > 0");
                   require(std::isfinite(m.x_e), "morse x_e must be finite");
                 },
                 [](const Polynomial& p) {
                   require(!p.coefficients.empty(), "polynomial needs at least one coefficient");
                   for (double c : p.coefficients) require(std::isfinite(c), "polynomial coefficients must be finite");
                 },
             },
             v_);
}

double PotentialModel::eval(double x) const {
  return std::visit(overloaded{
                        [x](const Harmonic& h) { return 0.5 * h.mass * h.omega0 * h.omega0 * x * x; },
                        [x](const QuarticDoubleWell& w) {
                          const double a2 = w.a * w.a;
                          const double d = x * x - a2;
                          return w.barrier * d * d / (a2 * a2);
                        },
                        [x](const Morse& m) {
                          const double e = 1.0 - std::exp(-m.alpha * (x - m.x_e));
                          return m.depth * e * e;
                        },
                        [x](const Polynomial& p) { return poly_eval(p.coefficients, x, 0); },
                    },
                    v_);
}

double PotentialModel::derivative(double x) const {
  return std::visit(overloaded{
                        [x](const Harmonic& h) { return h.mass * h.omega0 * h.omega0 * x; },
                        [x](const QuarticDoubleWell& w) {
                          const double a2 = w.a * w.a;
                          return 4.0 * w.barrier * x * (x * x - a2) / (a2 * a2);
                        },
                        [x](const Morse& m) {
                          const double e = std::exp(-m.alpha * (x - m.x_e));
                          return 2.0 * m.depth * m.alpha * e * (1.0 - e);
                        },
                        [x](const Polynomial& p) { return poly_eval(p.coefficients, x, 1); },
                    },
                    v_);
}

double PotentialModel::second_derivative(double x) const {
  return std::visit(overloaded{
                        [](const Harmonic& h) { return h.mass * h.omega0 * h.omega0; },
                        [x](const QuarticDoubleWell& w) {
                          const double a2 = w.a * w.a;
                          return 4.0 * w.barrier * (3.0 * x * x - a2) / (a2 * a2);
                        },
                        [x](const Morse& m) {
                          const double e = std::exp(-m.alpha * (x - m.x_e));
                          return 2.0 * m.depth * m.alpha * m.alpha * e * (2.0 * e - 1.0);
                        },
                        [x](const Polynomial& p) { return poly_eval(p.coefficients, x, 2); },
                    },
                    v_);
}

bool PotentialModel::is_even() const {
  return std::visit(overloaded{
                        [](const Harmonic&) { return true; },
                        [](const QuarticDoubleWell&) { return true; },
                        [](const Morse&) { return false; },
                        [](const Polynomial& p) {
                          for (std::size_t k = 1; k < p.coefficients.size(); k += 2)
                            if (p.coefficients[k] != 0.0) return false;
                          return true;
                        },
                    },
                    v_);
}

double PotentialModel::argmin() const {
  return std::visit(overloaded{
                        [](const Harmonic&) { return 0.0; },
                        [](const QuarticDoubleWell& w) { return w.a; },
                        [](const Morse& m) { return m.x_e; },
                        [this](const Polynomial&) {
                          double best = 0.0, vbest = std::numeric_limits<double>::infinity();
                          for (int i = 0; i <= 4000; ++i) {
                            const double x = -10.0 + 0.005 * i;
                            const double v = eval(x);
                            if (v < vbest) {
                              vbest = v;
                              best = x;
                            }
                          }
                          for (int it = 0; it < 50; ++it) {
                            const double h = second_derivative(best);
                            if (!(h > 0.0)) break;
                            const double step = derivative(best) / h;
                            best -= step;
                            if (std::abs(step) < 1e-15) break;
                          }
                          return best;
                        },
                    },
                    v_);
}

double PotentialModel::continuum_threshold() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(overloaded{
                        [](const Harmonic&) { return inf; },
                        [](const QuarticDoubleWell&) { return inf; },
                        [](const Morse& m) { return m.depth; },
                        [](const Polynomial& p) {
                          std::size_t d = p.coefficients.size();
                          while (d > 0 && p.coefficients[d - 1] == 0.0) --d;
                          if (d == 0) return -inf;
                          const bool confining = (d - 1) % 2 == 0 && d > 1 && p.coefficients[d - 1] > 0.0;
                          return confining ? inf : -inf;
                        },
                    },
                    v_);
}

std::string PotentialModel::kind() const {
  return std::visit(overloaded{
                        [](const Harmonic&) { return std::string("harmonic"); },
                        [](const QuarticDoubleWell&) { return std::string("double_well"); },
                        [](const Morse&) { return std::string("morse"); },
                        [](const Polynomial&) { return std::string("polynomial"); },
                    },
                    v_);
}

rvec displaced_on_grid(const PotentialModel& model, const ProductGrid& grid, double zeta_eff) {
  const auto xs = grid.matter.points();
  if (!grid.cavity) {
    rvec out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = model.eval(xs[i]);
    return out;
  }
  const auto cs = grid.cavity->points();
  const std::size_t nc = cs.size();
  rvec out(xs.size() * nc);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < nc; ++j) out[i * nc + j] = model.eval(xs[i] + zeta_eff * cs[j]);
  return out;
}

}  // namespace cavlab
