#pragma once

#include <vector>

#include "gwdetours/gw_1d.hpp"
#include "gwdetours/measures.hpp"

namespace gwd {

/// Triangular coupling built coordinate by coordinate, with the majority
/// (by transported mass) direction chosen at each level.
struct TriangularCoupling {
  Coupling coupling;
  std::vector<Direction> level_directions;
};

/// Knothe-Rosenblatt coupling: couple first coordinates by the increasing
/// rearrangement, then for each matched pair of first-coordinate values
/// recurse on the conditional measures of the remaining coordinates.
/// Conditionals group points whose preceding coordinates are equal (or fall in
/// the same cell of width `quantization` when it is > 0). Split atoms carry
/// their fractional mass into the recursion. At the last level mass is spread
/// over each pair of groups as a product.
TriangularCoupling classical_kr(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double quantization = 0.0);

/// Same recursion, but each conditional 1D coupling is the inner-GW optimum
/// (ascending or descending rearrangement, see inner_gw_1d).
TriangularCoupling alternate_kr(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double quantization = 0.0);

}  // namespace gwd
