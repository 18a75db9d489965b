#include "cavlab/wave_field.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "cavlab/errors.hpp"
#include "cavlab/simd/kernels.hpp"

namespace cavlab {

namespace {
constexpr char kMagic[8] = {'C', 'V', 'L', 'B', 'P', 'S', 'I', '\0'};

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void get(std::ifstream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("snapshot truncated");
}
}  // namespace

double WaveField::norm2() const { return simd::norm2(data.data(), data.size()) * grid.cell_volume(); }

double WaveField::norm() const { return std::sqrt(norm2()); }

void WaveField::normalize() {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite field");
  const double s = 1.0 / n;
  for (auto& z : data) z *= s;
}

cplx WaveField::inner(const WaveField& other) const {
  if (other.data.size() != data.size()) throw InvalidArgument("inner product of fields on different grids");
  return simd::dot(data.data(), other.data.data(), data.size()) * grid.cell_volume();
}

double WaveField::expectation(const rvec& w) const {
  if (w.size() != data.size()) throw InvalidArgument("observable size does not match field");
  return simd::weighted_norm2(w.data(), data.data(), data.size()) * grid.cell_volume();
}

std::vector<double> matter_density(const WaveField& psi) {
  const std::size_t n0 = psi.grid.matter.n;
  const std::size_t n1 = psi.grid.cavity ? psi.grid.cavity->n : 1;
  const double w = psi.grid.cavity ? psi.grid.cavity->dx() : 1.0;
  std::vector<double> rho(n0, 0.0);
  for (std::size_t i = 0; i < n0; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n1; ++j) s += std::norm(psi.data[i * n1 + j]);
    rho[i] = s * w;
  }
  return rho;
}

cvec gaussian_on_axis(const AxisGrid& axis, double x0, double p0, double sigma, double hbar) {
  if (!(sigma > 0.0) || !(hbar > 0.0)) throw InvalidArgument("gaussian needs sigma, hbar > 0");
  cvec out(axis.n);
  double s = 0.0;
  for (std::size_t i = 0; i < axis.n; ++i) {
    const double x = axis.point(i);
    const double d = x - x0;
    out[i] = std::exp(-d * d / (4.0 * sigma * sigma)) * std::polar(1.0, p0 * x / hbar);
    s += std::norm(out[i]);
  }
  const double scale = 1.0 / std::sqrt(s * axis.dx());
  for (auto& z : out) z *= scale;
  return out;
}

WaveField product_state(const ProductGrid& grid, const cvec& matter, const cvec& cavity) {
  if (!grid.cavity) throw InvalidArgument("product_state needs a two-axis grid");
  if (matter.size() != grid.matter.n || cavity.size() != grid.cavity->n)
    throw InvalidArgument("product_state factor sizes do not match the grid");
  WaveField psi(grid);
  const std::size_t n1 = cavity.size();
  for (std::size_t i = 0; i < matter.size(); ++i)
    for (std::size_t j = 0; j < n1; ++j) psi.data[i * n1 + j] = matter[i] * cavity[j];
  psi.normalize();
  return psi;
}

double edge_mass(const WaveField& psi, std::size_t cells) {
  const std::size_t n0 = psi.grid.matter.n;
  const std::size_t n1 = psi.grid.cavity ? psi.grid.cavity->n : 1;
  const bool two = psi.grid.cavity.has_value();
  double edge = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n0; ++i) {
    const bool ei = i < cells || i + cells >= n0;
    for (std::size_t j = 0; j < n1; ++j) {
      const double p = std::norm(psi.data[i * n1 + j]);
      total += p;
      if (ei || (two && (j < cells || j + cells >= n1))) edge += p;
    }
  }
  return total > 0.0 ? edge / total : 0.0;
}

void write_snapshot(const WaveField& psi, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open snapshot for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  put(os, kSnapshotVersion);
  put(os, static_cast<std::uint32_t>(psi.grid.rank()));
  put(os, static_cast<std::uint64_t>(psi.grid.matter.n));
  put(os, static_cast<std::uint64_t>(psi.grid.cavity ? psi.grid.cavity->n : 1));
  put(os, psi.grid.matter.dx());
  put(os, psi.grid.cavity ? psi.grid.cavity->dx() : 0.0);
  put(os, psi.time);
  for (const auto& z : psi.data) {
    put(os, z.real());
    put(os, z.imag());
  }
  if (!os) throw InvalidArgument("failed writing snapshot: " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open snapshot: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw InvalidArgument("not a snapshot file: " + path);
  Snapshot s;
  get(is, s.version);
  get(is, s.rank);
  get(is, s.n0);
  get(is, s.n1);
  get(is, s.dx0);
  get(is, s.dx1);
  get(is, s.t);
  if (s.version != kSnapshotVersion) throw InvalidArgument("unsupported snapshot version");
  s.data.resize(s.n0 * s.n1);
  for (auto& z : s.data) {
    double re = 0.0, im = 0.0;
    get(is, re);
    get(is, im);
    z = cplx(re, im);
  }
  return s;
}

}  // namespace cavlab
