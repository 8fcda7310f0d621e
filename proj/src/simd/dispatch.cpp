#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels.hpp"

namespace qgraph::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  const Isa best = detected_isa();
  if (const char* env = std::getenv("QGRAPH_SIMD")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return best;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
  static const Isa isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  return isa;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2)
    throw std::runtime_error("AVX2/FMA not supported on this CPU");
  current().store(isa, std::memory_order_relaxed);
}

const KernelSet& kernels(Isa isa) {
  return isa == Isa::avx2 ? avx2::kernel_set() : scalar::kernel_set();
}

}  // namespace qgraph::simd
