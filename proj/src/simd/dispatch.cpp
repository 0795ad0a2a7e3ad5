#include <cstdlib>
#include <cstring>

#include "nlcvp/simd/linalg.hpp"

namespace nlcvp::simd {

#if !defined(__x86_64__) && !defined(_M_X64) && !defined(__aarch64__)
const Kernels* avx2_kernels() noexcept { return nullptr; }
const Kernels* neon_kernels() noexcept { return nullptr; }
#endif

const char* to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

namespace {

struct Choice {
  Isa isa;
  const Kernels* kernels;
};

Choice choose() noexcept {
  const char* env = std::getenv("NLCVP_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return {Isa::scalar, &scalar_kernels()};
  if (const Kernels* k = avx2_kernels()) return {Isa::avx2, k};
  if (const Kernels* k = neon_kernels()) return {Isa::neon, k};
  return {Isa::scalar, &scalar_kernels()};
}

const Choice& choice() noexcept {
  static const Choice c = choose();
  return c;
}

}  // namespace

Isa active_isa() noexcept { return choice().isa; }
const Kernels& active() noexcept { return *choice().kernels; }

}  // namespace nlcvp::simd
