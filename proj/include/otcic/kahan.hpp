#pragma once

#include <cstddef>

namespace otcic {

// Compensated (Kahan) accumulator. Costs two extra flops per add and keeps
// long reductions accurate to a few ulps regardless of length.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// Compensated mean of n doubles.
inline double kahan_mean(const double* values, std::size_t n) {
  Kahan acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(values[i]);
  return acc.sum / static_cast<double>(n);
}

}  // namespace otcic
