#pragma once

// Thin wrapper over FFTW. Plans are created once per shape with FFTW_ESTIMATE
// (deterministic algorithm choice, so repeated runs are bit-identical) and
// cached process-wide; execution is thread-safe.
//
// Conventions: forward is exp(-i k x), backward is exp(+i k x), neither is
// normalized. Multi-dimensional arrays are row-major with the matter axis
// first.

#include <cstddef>
#include <vector>

#include "cavlab/aligned.hpp"

namespace cavlab::fft {

using Shape = std::vector<std::size_t>;

void forward(const Shape& dims, cplx* data);
void backward(const Shape& dims, cplx* data);

/// 1D transforms along axis 0 of an (n0, n1) array, one per column.
void forward_axis0(std::size_t n0, std::size_t n1, cplx* data);
void backward_axis0(std::size_t n0, std::size_t n1, cplx* data);

/// Real-to-half-complex transforms. The complex side has shape
/// dims[0..r-2] x (dims[r-1]/2 + 1). c2r overwrites its input.
std::size_t half_complex_size(const Shape& dims);
void r2c(const Shape& dims, const double* in, cplx* out);
void c2r(const Shape& dims, cplx* in, double* out);

std::size_t total_size(const Shape& dims);

/// True for sizes whose only prime factors are 2, 3, 5 or 7.
bool is_fast_size(std::size_t n);
/// Smallest fast size >= n (and even when require_even).
std::size_t next_fast_size(std::size_t n, bool require_even = true);

}  // namespace cavlab::fft
