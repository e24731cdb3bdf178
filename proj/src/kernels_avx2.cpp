// AVX2 variants of the dispatched kernels. Each vector lane performs the same
// operations in the same order as the scalar reference (subtract, multiply,
// add; no fma), so outputs are bit-identical and the dispatch choice can never
// change results. Tails shorter than a vector fall back to the scalar formula.

#include <immintrin.h>

#include "otcic/kernels.hpp"

namespace otcic::kernels::avx2 {

void sqdist_matrix(const double* a, std::size_t n, const double* bt, std::size_t m,
                   std::size_t d, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out + i * m;
    std::size_t j = 0;
    const __m256d zero = _mm256_setzero_pd();
    for (; j + 4 <= m; j += 4) _mm256_storeu_pd(row + j, zero);
    for (; j < m; ++j) row[j] = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double ak = a[i * d + k];
      const double* bk = bt + k * m;
      const __m256d av = _mm256_set1_pd(ak);
      j = 0;
      for (; j + 4 <= m; j += 4) {
        const __m256d bv = _mm256_loadu_pd(bk + j);
        const __m256d diff = _mm256_sub_pd(av, bv);
        const __m256d sq = _mm256_mul_pd(diff, diff);
        const __m256d acc = _mm256_add_pd(_mm256_loadu_pd(row + j), sq);
        _mm256_storeu_pd(row + j, acc);
      }
      for (; j < m; ++j) {
        const double diff = ak - bk[j];
        row[j] = row[j] + diff * diff;
      }
    }
  }
}

void count_dominated(const double* st, std::size_t n, std::size_t d, const double* z,
                     std::size_t q, std::uint64_t* counts) {
  for (std::size_t t = 0; t < q; ++t) {
    const double* zt = z + t * d;
    std::uint64_t count = 0;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(st + j), _mm256_set1_pd(zt[0]),
                                   _CMP_LE_OQ);
      for (std::size_t k = 1; k < d; ++k) {
        const __m256d cmp = _mm256_cmp_pd(_mm256_loadu_pd(st + k * n + j),
                                          _mm256_set1_pd(zt[k]), _CMP_LE_OQ);
        mask = _mm256_and_pd(mask, cmp);
      }
      count += static_cast<std::uint64_t>(
          __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(mask))));
    }
    for (; j < n; ++j) {
      bool inside = true;
      for (std::size_t k = 0; k < d; ++k) {
        if (!(st[k * n + j] <= zt[k])) {
          inside = false;
          break;
        }
      }
      count += inside ? 1 : 0;
    }
    counts[t] = count;
  }
}

}  // namespace otcic::kernels::avx2
