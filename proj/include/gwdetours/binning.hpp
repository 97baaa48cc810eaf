#pragma once

#include <vector>

#include "gwdetours/measures.hpp"

namespace gwd {

/// Partition of points by equal (optionally quantized) coordinates.
/// With quantization delta > 0 a coordinate x falls in cell round(x / delta)
/// and the bin is represented by round(x / delta) * delta; with delta = 0 the
/// grouping is by exact value. Bins are ordered lexicographically by their
/// representative; members of a bin keep ascending index order.
struct Binning {
  std::vector<Eigen::Index> bin_of;                 // point -> bin
  std::vector<std::vector<Eigen::Index>> members;   // bin -> points
  Matrix representatives;                           // bins x k
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(members.size()); }
};

Binning bin_points(const Matrix& coords, double quantization = 0.0);

/// Bin masses: sum of weights over each bin's members.
Vector bin_masses(const Binning& bins, const Vector& weights);

}  // namespace gwd
