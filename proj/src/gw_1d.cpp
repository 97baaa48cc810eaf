#include "gwdetours/gw_1d.hpp"

#include <algorithm>
#include <cmath>

#include "gwdetours/exact_ot.hpp"
#include "gwdetours/hadamard.hpp"

namespace gwd {

const char* direction_name(Direction d) noexcept {
  return d == Direction::Ascending ? "ascending" : "descending";
}

Coupling monotone_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Direction direction) {
  if (mu.dim() != 1 || nu.dim() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "monotone coupling needs one-dimensional measures");
  }
  const Vector x = mu.points().col(0);
  const Vector y = nu.points().col(0);
  Matrix plan = north_west_corner(mu.weights(), sorted_order(x), nu.weights(),
                                  sorted_order(y, direction == Direction::Descending));
  return Coupling(std::move(plan), mu.weights(), nu.weights());
}

MonotoneChoice inner_gw_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "inner_gw_1d needs one-dimensional measures");
  }
  const HWInstance inst(mu.points(), nu.points(), mu.weights(), nu.weights());
  Coupling asc = monotone_coupling(mu, nu, Direction::Ascending);
  Coupling desc = monotone_coupling(mu, nu, Direction::Descending);
  const double e_asc = std::max(0.0, hw_energy(inst, asc));
  const double e_desc = std::max(0.0, hw_energy(inst, desc));
  // Energy scale: (E x^2)^2 + (E y^2)^2 bounds both candidates.
  const double mx = mu.weights().dot(mu.points().col(0).cwiseAbs2());
  const double my = nu.weights().dot(nu.points().col(0).cwiseAbs2());
  const double scale = std::max(1.0, mx * mx + my * my);
  if (e_desc < e_asc - 1e-12 * scale) {
    return {Direction::Descending, std::move(desc), e_desc};
  }
  return {Direction::Ascending, std::move(asc), e_asc};
}

}  // namespace gwd
