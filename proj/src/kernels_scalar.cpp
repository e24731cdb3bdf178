#include "otcic/kernels.hpp"

namespace otcic::kernels::scalar {

void sqdist_matrix(const double* a, std::size_t n, const double* bt, std::size_t m,
                   std::size_t d, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out + i * m;
    for (std::size_t j = 0; j < m; ++j) row[j] = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double ak = a[i * d + k];
      const double* bk = bt + k * m;
      for (std::size_t j = 0; j < m; ++j) {
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
    for (std::size_t j = 0; j < n; ++j) {
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

}  // namespace otcic::kernels::scalar
