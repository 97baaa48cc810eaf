#include "gwdetours/binning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gwd {

Binning bin_points(const Matrix& coords, double quantization) {
  if (!(quantization >= 0.0) || !std::isfinite(quantization)) {
    throw Error(ErrorCode::InvalidArgument, "quantization width must be finite and >= 0");
  }
  const Eigen::Index n = coords.rows();
  const Eigen::Index k = coords.cols();
  Matrix keys = coords;
  if (quantization > 0.0) keys = (coords / quantization).array().round().matrix();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < k; ++c) {
      if (keys(a, c) < keys(b, c)) return true;
      if (keys(b, c) < keys(a, c)) return false;
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), less);

  Binning out;
  out.bin_of.assign(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> first_of_bin;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const Eigen::Index i = order[r];
    if (r == 0 || less(order[r - 1], i)) {
      out.members.emplace_back();
      first_of_bin.push_back(i);
    }
    out.members.back().push_back(i);
    out.bin_of[static_cast<std::size_t>(i)] = out.size() - 1;
  }
  out.representatives.resize(out.size(), k);
  for (Eigen::Index b = 0; b < out.size(); ++b) {
    const Eigen::Index i = first_of_bin[static_cast<std::size_t>(b)];
    out.representatives.row(b) = quantization > 0.0 ? (keys.row(i) * quantization).eval() : coords.row(i);
  }
  return out;
}

Vector bin_masses(const Binning& bins, const Vector& weights) {
  Vector out = Vector::Zero(bins.size());
  for (std::size_t i = 0; i < bins.bin_of.size(); ++i) {
    out(bins.bin_of[i]) += weights(static_cast<Eigen::Index>(i));
  }
  return out;
}

}  // namespace gwd
