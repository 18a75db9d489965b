#pragma once

// Data-parallel inner loops shared by the grid operators, the propagator and
// the eigensolvers. Each kernel has a scalar reference implementation and,
// on x86-64, an AVX2+FMA variant; the variant is chosen once at startup from
// CPUID and can be pinned with CAVLAB_SIMD=scalar|avx2 or set_isa().
//
// Elementwise kernels are bitwise reproducible for a fixed ISA. Reductions
// use a different summation order per ISA, so scalar and AVX2 results agree
// only to rounding.

#include <complex>
#include <cstddef>

namespace cavlab::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
  // z[i] *= r[i]
  void (*mul_real)(cplx* z, const double* r, std::size_t n);
  // z[i] *= w[i]
  void (*mul_complex)(cplx* z, const cplx* w, std::size_t n);
  // out[i] += r[i] * z[i]
  void (*add_mul_real)(cplx* out, const double* r, const cplx* z, std::size_t n);
  // out[i] += a[i] * b[i]   (real arrays)
  void (*add_mul_rr)(double* out, const double* a, const double* b, std::size_t n);
  // sum |z[i]|^2
  double (*norm2)(const cplx* z, std::size_t n);
  // sum conj(a[i]) * b[i]
  cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
  // sum w[i] |z[i]|^2
  double (*weighted_norm2)(const double* w, const cplx* z, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
};

bool isa_supported(Isa isa) noexcept;
Isa active_isa() noexcept;
/// Throws InvalidArgument if the ISA is not available on this machine/build.
void set_isa(Isa isa);
const char* to_string(Isa isa) noexcept;

const KernelTable& kernels() noexcept;
const KernelTable& kernels_for(Isa isa);

namespace scalar {
extern const KernelTable table;
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
extern const KernelTable table;
}
#endif

inline void mul_real(cplx* z, const double* r, std::size_t n) { kernels().mul_real(z, r, n); }
inline void mul_complex(cplx* z, const cplx* w, std::size_t n) { kernels().mul_complex(z, w, n); }
inline void add_mul_real(cplx* out, const double* r, const cplx* z, std::size_t n) {
  kernels().add_mul_real(out, r, z, n);
}
inline void add_mul_rr(double* out, const double* a, const double* b, std::size_t n) {
  kernels().add_mul_rr(out, a, b, n);
}
inline double norm2(const cplx* z, std::size_t n) { return kernels().norm2(z, n); }
inline cplx dot(const cplx* a, const cplx* b, std::size_t n) { return kernels().dot(a, b, n); }
inline double weighted_norm2(const double* w, const cplx* z, std::size_t n) {
  return kernels().weighted_norm2(w, z, n);
}
inline void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) { kernels().axpy(a, x, y, n); }

}  // namespace cavlab::simd
