#include "otcic/point_cloud.hpp"

#include <cmath>
#include <stdexcept>

namespace otcic {

namespace {

std::vector<double> uniform_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace

PointCloud::PointCloud(std::vector<double> data, std::size_t dim)
    : PointCloud(std::move(data), dim, {}) {}

PointCloud::PointCloud(std::vector<double> data, std::size_t dim,
                       std::vector<double> weights)
    : data_(std::move(data)), weights_(std::move(weights)), dim_(dim) {
  if (dim_ == 0) throw std::invalid_argument("point cloud dimension must be positive");
  if (data_.empty() || data_.size() % dim_ != 0)
    throw std::invalid_argument("point data size is not a positive multiple of dim");
  size_ = data_.size() / dim_;
  for (double x : data_) {
    if (!std::isfinite(x)) throw std::invalid_argument("point coordinates must be finite");
  }
  if (weights_.empty()) {
    weights_ = uniform_weights(size_);
    return;
  }
  if (weights_.size() != size_)
    throw std::invalid_argument("weight count does not match point count");
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("weights must be finite and nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol)
    throw std::invalid_argument("weights must sum to 1 within 1e-9");
}

PointCloud PointCloud::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("point cloud needs at least one point");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (const auto& row : rows) {
    if (row.size() != d) throw std::invalid_argument("ragged rows in point cloud");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return PointCloud(std::move(flat), d);
}

PointCloud PointCloud::from_scalars(std::vector<double> values) {
  return PointCloud(std::move(values), 1);
}

std::vector<double> PointCloud::coordinate(std::size_t k) const {
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = data_[i * dim_ + k];
  return out;
}

}  // namespace otcic
