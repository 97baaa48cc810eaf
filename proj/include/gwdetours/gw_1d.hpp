#pragma once

#include "gwdetours/measures.hpp"

namespace gwd {

enum class Direction { Ascending, Descending };

const char* direction_name(Direction d) noexcept;

/// One of the two monotone couplings between 1D measures together with its
/// inner-product GW energy.
struct MonotoneChoice {
  Direction direction = Direction::Ascending;
  Coupling coupling;
  double cost = 0.0;
};

/// Monotone coupling in the given direction: mu sorted ascending against nu
/// sorted ascending (Ascending) or descending (Descending); equal values keep
/// index order.
Coupling monotone_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Direction direction);

/// Inner-product GW between 1D measures,
///   min_gamma sum (x_i x_k - y_j y_l)^2 gamma[i,j] gamma[k,l],
/// attained by the ascending or the descending rearrangement. Both are built
/// and the cheaper one is returned; energies within 1e-12 (relative to the
/// energy scale) count as a tie, which goes to Ascending.
MonotoneChoice inner_gw_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace gwd
