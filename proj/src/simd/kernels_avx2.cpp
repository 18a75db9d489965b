// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and must only be entered after a CPUID check (see dispatch.cpp).

#include <immintrin.h>

#include "cavlab/simd/kernels.hpp"

namespace cavlab::simd::avx2 {

namespace {

// Two complex doubles per register: [re0, im0, re1, im1].

inline __m256d cmul(__m256d z, __m256d w) {
  const __m256d wr = _mm256_movedup_pd(w);           // c c
  const __m256d wi = _mm256_permute_pd(w, 0xF);      // d d
  const __m256d zs = _mm256_permute_pd(z, 0x5);      // b a
  return _mm256_fmaddsub_pd(z, wr, _mm256_mul_pd(zs, wi));
}

// [r0, r0, r1, r1]
inline __m256d dup_pair(const double* r) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(r)), 0x50);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void mul_real(cplx* z, const double* r, std::size_t n) {
  double* zd = reinterpret_cast<double*>(z);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(zd + 2 * i);
    _mm256_storeu_pd(zd + 2 * i, _mm256_mul_pd(v, dup_pair(r + i)));
  }
  for (; i < n; ++i) z[i] *= r[i];
}

void mul_complex(cplx* z, const cplx* w, std::size_t n) {
  double* zd = reinterpret_cast<double*>(z);
  const double* wd = reinterpret_cast<const double*>(w);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d a = _mm256_loadu_pd(zd + 2 * i);
    const __m256d b = _mm256_loadu_pd(wd + 2 * i);
    _mm256_storeu_pd(zd + 2 * i, cmul(a, b));
  }
  for (; i < n; ++i) {
    const double a = z[i].real(), b = z[i].imag();
    const double c = w[i].real(), d = w[i].imag();
    z[i] = cplx(a * c - b * d, b * c + a * d);
  }
}

void add_mul_real(cplx* out, const double* r, const cplx* z, std::size_t n) {
  double* od = reinterpret_cast<double*>(out);
  const double* zd = reinterpret_cast<const double*>(z);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d o = _mm256_loadu_pd(od + 2 * i);
    const __m256d v = _mm256_loadu_pd(zd + 2 * i);
    _mm256_storeu_pd(od + 2 * i, _mm256_fmadd_pd(dup_pair(r + i), v, o));
  }
  for (; i < n; ++i) out[i] += r[i] * z[i];
}

void add_mul_rr(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d o = _mm256_loadu_pd(out + i);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), o));
  }
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

double norm2(const cplx* z, std::size_t n) {
  const double* zd = reinterpret_cast<const double*>(z);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(zd + 2 * i);
    const __m256d b = _mm256_loadu_pd(zd + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
  return s;
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  const double* ad = reinterpret_cast<const double*>(a);
  const double* bd = reinterpret_cast<const double*>(b);
  __m256d re = _mm256_setzero_pd();
  __m256d im = _mm256_setzero_pd();
  const __m256d sign = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(ad + 2 * i);
    const __m256d vb = _mm256_loadu_pd(bd + 2 * i);
    re = _mm256_fmadd_pd(va, vb, re);                                   // ar br, ai bi
    im = _mm256_fmadd_pd(va, _mm256_mul_pd(_mm256_permute_pd(vb, 0x5), sign), im);  // ar bi, -ai br
  }
  double sr = hsum(re), si = hsum(im);
  for (; i < n; ++i) {
    sr += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    si += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {sr, si};
}

double weighted_norm2(const double* w, const cplx* z, std::size_t n) {
  const double* zd = reinterpret_cast<const double*>(z);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(zd + 2 * i);
    acc = _mm256_fmadd_pd(dup_pair(w + i), _mm256_mul_pd(v, v), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * (z[i].real() * z[i].real() + z[i].imag() * z[i].imag());
  return s;
}

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double* xd = reinterpret_cast<const double*>(x);
  double* yd = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(xd + 2 * i);
    const __m256d prod = _mm256_fmaddsub_pd(v, ar, _mm256_mul_pd(_mm256_permute_pd(v, 0x5), ai));
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx(a.real() * xr - a.imag() * xi, a.real() * xi + a.imag() * xr);
  }
}

}  // namespace

const KernelTable table{mul_real, mul_complex, add_mul_real, add_mul_rr,
                        norm2,    dot,         weighted_norm2, axpy};

}  // namespace cavlab::simd::avx2
