#include "otcic/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace otcic::kernels {

namespace {

bool cpu_has_avx2() {
#if OTCIC_HAVE_AVX2 && defined(__GNUC__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa resolve_isa() {
  const char* env = std::getenv("OTCIC_SIMD");
  if (env != nullptr) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2") return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
    // anything else, including "auto", falls through to detection
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = resolve_isa();
  return isa;
}

std::string_view isa_name() {
  return active_isa() == Isa::avx2 ? "avx2" : "scalar";
}

bool avx2_compiled_in() {
#if OTCIC_HAVE_AVX2
  return true;
#else
  return false;
#endif
}

void sqdist_matrix(const double* a, std::size_t n, const double* bt, std::size_t m,
                   std::size_t d, double* out) {
#if OTCIC_HAVE_AVX2
  if (active_isa() == Isa::avx2) {
    avx2::sqdist_matrix(a, n, bt, m, d, out);
    return;
  }
#endif
  scalar::sqdist_matrix(a, n, bt, m, d, out);
}

void count_dominated(const double* st, std::size_t n, std::size_t d, const double* z,
                     std::size_t q, std::uint64_t* counts) {
#if OTCIC_HAVE_AVX2
  if (active_isa() == Isa::avx2) {
    avx2::count_dominated(st, n, d, z, q, counts);
    return;
  }
#endif
  scalar::count_dominated(st, n, d, z, q, counts);
}

std::vector<double> transpose(const double* rows, std::size_t n, std::size_t d) {
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) out[k * n + i] = rows[i * d + k];
  return out;
}

}  // namespace otcic::kernels
