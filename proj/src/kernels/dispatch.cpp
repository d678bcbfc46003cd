#include "sdigs/kernels/kernels.hpp"

#include "sdigs/core/error.hpp"

#include <cstdlib>
#include <string>

namespace sdigs::kernels {

#ifdef SDIGS_BUILD_AVX2
const Kernels& avx2_kernels_impl();  // kernels_avx2.cpp
#endif

bool avx2_supported() {
#ifdef SDIGS_BUILD_AVX2
  // Includes the OS XSAVE/YMM-state check via libgcc's CPU model.
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const Kernels* avx2_kernels() {
#ifdef SDIGS_BUILD_AVX2
  if (avx2_supported()) return &avx2_kernels_impl();
#endif
  return nullptr;
}

namespace {

const Kernels* g_active = nullptr;

const Kernels& resolve(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return scalar_kernels();
    case Backend::avx2: {
      const Kernels* k = avx2_kernels();
      if (!k) throw UsageError("AVX2 kernels are not available on this CPU");
      return *k;
    }
    case Backend::automatic:
    default: {
      const Kernels* k = avx2_kernels();
      return k ? *k : scalar_kernels();
    }
  }
}

Backend backend_from_env() {
  const char* env = std::getenv("SDIGS_KERNELS");
  if (!env || !*env) return Backend::automatic;
  std::string v(env);
  if (v == "scalar") return Backend::scalar;
  if (v == "avx2") return Backend::avx2;
  if (v == "auto") return Backend::automatic;
  throw UsageError("SDIGS_KERNELS must be one of: scalar, avx2, auto (got '" +
                   v + "')");
}

}  // namespace

const Kernels& active() {
  if (!g_active) g_active = &resolve(backend_from_env());
  return *g_active;
}

void select_backend(Backend backend) { g_active = &resolve(backend); }

}  // namespace sdigs::kernels
