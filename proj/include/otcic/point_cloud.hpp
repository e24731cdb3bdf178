#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace otcic {

// Weights must form a probability vector within this tolerance of 1.
inline constexpr double kWeightSumTol = 1e-9;

// A weighted sample of d-dimensional points, stored row-major. Immutable
// after construction; constructors validate shape and weights.
class PointCloud {
 public:
  // Uniform weights 1/n.
  PointCloud(std::vector<double> data, std::size_t dim);
  PointCloud(std::vector<double> data, std::size_t dim, std::vector<double> weights);

  static PointCloud from_rows(const std::vector<std::vector<double>>& rows);
  static PointCloud from_scalars(std::vector<double> values);

  std::size_t size() const { return size_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> point(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  double coord(std::size_t i, std::size_t k) const { return data_[i * dim_ + k]; }
  double weight(std::size_t i) const { return weights_[i]; }

  std::span<const double> data() const { return data_; }
  std::span<const double> weights() const { return weights_; }

  // Values of one coordinate across all points.
  std::vector<double> coordinate(std::size_t k) const;

 private:
  std::vector<double> data_;
  std::vector<double> weights_;
  std::size_t size_ = 0;
  std::size_t dim_ = 0;
};

}  // namespace otcic
