#include "cavlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "cavlab/errors.hpp"

namespace cavlab::fft {

namespace {

enum class Kind { c2c_fwd, c2c_bwd, axis0_fwd, axis0_bwd, r2c, c2r };

using Key = std::tuple<Kind, std::size_t, std::size_t, std::size_t>;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Kind kind, const Shape& dims) {
    if (dims.empty() || dims.size() > 2) throw InvalidArgument("fft: only rank 1 and 2 supported");
    const Key key{kind, dims.size(), dims[0], dims.size() > 1 ? dims[1] : 0};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    fftw_plan plan = make(kind, dims);
    if (plan == nullptr) throw InvalidArgument("fft: planner failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  static fftw_plan make(Kind kind, const Shape& dims) {
    const int rank = static_cast<int>(dims.size());
    int n[2] = {static_cast<int>(dims[0]), rank > 1 ? static_cast<int>(dims[1]) : 1};
    const std::size_t total = total_size(dims);
    const std::size_t half = half_complex_size(dims);
    const unsigned flags = FFTW_ESTIMATE;
    fftw_plan plan = nullptr;
    switch (kind) {
      case Kind::c2c_fwd:
      case Kind::c2c_bwd: {
        auto* buf = fftw_alloc_complex(total);
        plan = fftw_plan_dft(rank, n, buf, buf, kind == Kind::c2c_fwd ? FFTW_FORWARD : FFTW_BACKWARD,
                             flags);
        fftw_free(buf);
        break;
      }
      case Kind::axis0_fwd:
      case Kind::axis0_bwd: {
        auto* buf = fftw_alloc_complex(total);
        const int n1 = n[1];
        plan = fftw_plan_many_dft(1, n, n1, buf, nullptr, n1, 1, buf, nullptr, n1, 1,
                                  kind == Kind::axis0_fwd ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        fftw_free(buf);
        break;
      }
      case Kind::r2c: {
        auto* in = fftw_alloc_real(total);
        auto* out = fftw_alloc_complex(half);
        plan = fftw_plan_dft_r2c(rank, n, in, out, flags);
        fftw_free(in);
        fftw_free(out);
        break;
      }
      case Kind::c2r: {
        auto* in = fftw_alloc_complex(half);
        auto* out = fftw_alloc_real(total);
        plan = fftw_plan_dft_c2r(rank, n, in, out, flags);
        fftw_free(in);
        fftw_free(out);
        break;
      }
    }
    return plan;
  }

  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

// Plans were created on fftw_malloc'ed buffers; FFTW's new-array interface
// requires the same alignment class at execution time.
template <class T>
bool aligned(const T* p) {
  return fftw_alignment_of(reinterpret_cast<double*>(const_cast<T*>(p))) == 0;
}

void exec_c2c(Kind kind, const Shape& dims, cplx* data) {
  fftw_plan plan = cache().get(kind, dims);
  auto* d = reinterpret_cast<fftw_complex*>(data);
  if (aligned(data)) {
    fftw_execute_dft(plan, d, d);
    return;
  }
  const std::size_t n = total_size(dims);
  cvec tmp(data, data + n);
  auto* t = reinterpret_cast<fftw_complex*>(tmp.data());
  fftw_execute_dft(plan, t, t);
  std::copy(tmp.begin(), tmp.end(), data);
}

}  // namespace

std::size_t total_size(const Shape& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::size_t half_complex_size(const Shape& dims) {
  std::size_t n = dims.back() / 2 + 1;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) n *= dims[i];
  return n;
}

void forward(const Shape& dims, cplx* data) { exec_c2c(Kind::c2c_fwd, dims, data); }
void backward(const Shape& dims, cplx* data) { exec_c2c(Kind::c2c_bwd, dims, data); }

void forward_axis0(std::size_t n0, std::size_t n1, cplx* data) {
  exec_c2c(Kind::axis0_fwd, Shape{n0, n1}, data);
}
void backward_axis0(std::size_t n0, std::size_t n1, cplx* data) {
  exec_c2c(Kind::axis0_bwd, Shape{n0, n1}, data);
}

void r2c(const Shape& dims, const double* in, cplx* out) {
  fftw_plan plan = cache().get(Kind::r2c, dims);
  if (aligned(in) && aligned(out)) {
    fftw_execute_dft_r2c(plan, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
    return;
  }
  rvec a(in, in + total_size(dims));
  cvec b(half_complex_size(dims));
  fftw_execute_dft_r2c(plan, a.data(), reinterpret_cast<fftw_complex*>(b.data()));
  std::copy(b.begin(), b.end(), out);
}

void c2r(const Shape& dims, cplx* in, double* out) {
  fftw_plan plan = cache().get(Kind::c2r, dims);
  if (aligned(in) && aligned(out)) {
    fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(in), out);
    return;
  }
  cvec a(in, in + half_complex_size(dims));
  rvec b(total_size(dims));
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(a.data()), b.data());
  std::copy(b.begin(), b.end(), out);
}

bool is_fast_size(std::size_t n) {
  if (n == 0) return false;
  for (std::size_t p : {2u, 3u, 5u, 7u})
    while (n % p == 0) n /= p;
  return n == 1;
}

std::size_t next_fast_size(std::size_t n, bool require_even) {
  if (n < 2) n = 2;
  while (!is_fast_size(n) || (require_even && n % 2 != 0)) ++n;
  return n;
}

}  // namespace cavlab::fft
