#include "hyperlin/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace hyperlin::kernels {

#ifdef HYPERLIN_HAVE_AVX2
const KernelTable& avx2_table_impl();
#endif

const KernelTable* avx2_table() {
#ifdef HYPERLIN_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* force = std::getenv("HYPERLIN_KERNELS");
    if (force != nullptr && std::strcmp(force, "scalar") == 0) return &scalar_table();
    const KernelTable* simd = avx2_table();
    return simd != nullptr ? simd : &scalar_table();
  }();
  return *chosen;
}

}  // namespace hyperlin::kernels
