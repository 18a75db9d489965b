#include <doctest.h>

#include <random>
#include <vector>

#include "cavlab/simd/kernels.hpp"

using namespace cavlab::simd;

namespace {

struct Data {
  std::vector<cplx> a, b;
  std::vector<double> r, s;
};

Data make_data(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  Data x;
  for (std::size_t i = 0; i < n; ++i) {
    x.a.emplace_back(d(g), d(g));
    x.b.emplace_back(d(g), d(g));
    x.r.push_back(d(g));
    x.s.push_back(d(g));
  }
  return x;
}

}  // namespace

TEST_CASE("scalar and AVX2 kernels agree") {
  if (!isa_supported(Isa::avx2)) {
    MESSAGE("AVX2 not available; only the scalar table is exercised");
    return;
  }
  const KernelTable& S = kernels_for(Isa::scalar);
  const KernelTable& V = kernels_for(Isa::avx2);
  // Odd sizes cover the remainder loops.
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1001u}) {
    CAPTURE(n);
    const Data x = make_data(n, 7 + static_cast<unsigned>(n));

    auto z1 = x.a, z2 = x.a;
    S.mul_real(z1.data(), x.r.data(), n);
    V.mul_real(z2.data(), x.r.data(), n);
    CHECK(z1 == z2);

    z1 = x.a, z2 = x.a;
    S.mul_complex(z1.data(), x.b.data(), n);
    V.mul_complex(z2.data(), x.b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(z1[i] - z2[i]) <= 1e-15 * (1 + std::abs(z1[i])));

    z1 = x.b, z2 = x.b;
    S.add_mul_real(z1.data(), x.r.data(), x.a.data(), n);
    V.add_mul_real(z2.data(), x.r.data(), x.a.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(z1[i] - z2[i]) <= 1e-15 * (1 + std::abs(z1[i])));

    auto o1 = x.s, o2 = x.s;
    S.add_mul_rr(o1.data(), x.r.data(), x.s.data(), n);
    V.add_mul_rr(o2.data(), x.r.data(), x.s.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-15));

    const double tol = 1e-14 * (1 + static_cast<double>(n));
    CHECK(std::abs(S.norm2(x.a.data(), n) - V.norm2(x.a.data(), n)) <= tol);
    CHECK(std::abs(S.dot(x.a.data(), x.b.data(), n) - V.dot(x.a.data(), x.b.data(), n)) <= tol);
    auto w = x.r;
    for (auto& v : w) v = std::abs(v);
    CHECK(std::abs(S.weighted_norm2(w.data(), x.a.data(), n) - V.weighted_norm2(w.data(), x.a.data(), n)) <= tol);

    z1 = x.b, z2 = x.b;
    S.axpy(cplx(0.3, -1.1), x.a.data(), z1.data(), n);
    V.axpy(cplx(0.3, -1.1), x.a.data(), z2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(z1[i] - z2[i]) <= 1e-15 * (1 + std::abs(z1[i])));
  }
}

TEST_CASE("scalar reductions against a plain loop") {
  const Data x = make_data(257, 3);
  const KernelTable& S = kernels_for(Isa::scalar);
  double n2 = 0;
  cplx d = 0;
  for (std::size_t i = 0; i < 257; ++i) {
    n2 += std::norm(x.a[i]);
    d += std::conj(x.a[i]) * x.b[i];
  }
  CHECK(S.norm2(x.a.data(), 257) == doctest::Approx(n2).epsilon(1e-13));
  CHECK(std::abs(S.dot(x.a.data(), x.b.data(), 257) - d) < 1e-12);
}

TEST_CASE("ISA can be pinned and restored") {
  const Isa before = active_isa();
  set_isa(Isa::scalar);
  CHECK(active_isa() == Isa::scalar);
  set_isa(before);
  CHECK(active_isa() == before);
}
