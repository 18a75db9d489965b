#include "cavlab/simd/kernels.hpp"

namespace cavlab::simd::scalar {

namespace {

void mul_real(cplx* z, const double* r, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] *= r[i];
}

// Written out rather than using operator* so that the result does not depend
// on the library's inf/nan handling path for complex multiplication.
void mul_complex(cplx* z, const cplx* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = z[i].real(), b = z[i].imag();
    const double c = w[i].real(), d = w[i].imag();
    z[i] = cplx(a * c - b * d, b * c + a * d);
  }
}

void add_mul_real(cplx* out, const double* r, const cplx* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += r[i] * z[i];
}

void add_mul_rr(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

double norm2(const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
  return s;
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double weighted_norm2(const double* w, const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += w[i] * (z[i].real() * z[i].real() + z[i].imag() * z[i].imag());
  return s;
}

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx(ar * xr - ai * xi, ar * xi + ai * xr);
  }
}

}  // namespace

const KernelTable table{mul_real, mul_complex, add_mul_real, add_mul_rr,
                        norm2,    dot,         weighted_norm2, axpy};

}  // namespace cavlab::simd::scalar
