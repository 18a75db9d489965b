#include <atomic>
#include <cstdlib>
#include <cstring>

#include "cavlab/errors.hpp"
#include "cavlab/simd/kernels.hpp"

namespace cavlab::simd {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(CAVLAB_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() noexcept {
  const char* env = std::getenv("CAVLAB_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw InvalidArgument(std::string("SIMD ISA not supported: ") + to_string(isa));
  current().store(isa, std::memory_order_relaxed);
}

const char* to_string(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) throw InvalidArgument(std::string("SIMD ISA not supported: ") + to_string(isa));
#if defined(CAVLAB_HAVE_AVX2_TU)
  if (isa == Isa::avx2) return avx2::table;
#endif
  return scalar::table;
}

const KernelTable& kernels() noexcept {
#if defined(CAVLAB_HAVE_AVX2_TU)
  if (active_isa() == Isa::avx2) return avx2::table;
#endif
  return scalar::table;
}

}  // namespace cavlab::simd
