#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace otcic::kernels {

// Instruction set used by the dispatched kernels below. Resolved once per
// process: OTCIC_SIMD=scalar|avx2|auto overrides, otherwise the CPU decides.
// SIMD variants are written to be bit-identical to the scalar reference
// (same per-element operation order, no fused multiply-add), so selection
// never changes results.
enum class Isa { scalar, avx2 };

Isa active_isa();
std::string_view isa_name();
bool avx2_compiled_in();

// out[i*m + j] = sum_k (a[i*d + k] - bt[k*m + j])^2.
// `a` is row-major (n x d); `bt` is coordinate-major (d x m).
void sqdist_matrix(const double* a, std::size_t n, const double* bt, std::size_t m,
                   std::size_t d, double* out);

// counts[t] = #{ j in [0,n) : st[k*n + j] <= z[t*d + k] for all k }.
// `st` is coordinate-major (d x n); `z` is row-major (q x d).
void count_dominated(const double* st, std::size_t n, std::size_t d, const double* z,
                     std::size_t q, std::uint64_t* counts);

// Reference implementations, always available.
namespace scalar {
void sqdist_matrix(const double* a, std::size_t n, const double* bt, std::size_t m,
                   std::size_t d, double* out);
void count_dominated(const double* st, std::size_t n, std::size_t d, const double* z,
                     std::size_t q, std::uint64_t* counts);
}  // namespace scalar

namespace avx2 {
void sqdist_matrix(const double* a, std::size_t n, const double* bt, std::size_t m,
                   std::size_t d, double* out);
void count_dominated(const double* st, std::size_t n, std::size_t d, const double* z,
                     std::size_t q, std::uint64_t* counts);
}  // namespace avx2

// Rearranges row-major (n x d) data into coordinate-major (d x n).
std::vector<double> transpose(const double* rows, std::size_t n, std::size_t d);

}  // namespace otcic::kernels
