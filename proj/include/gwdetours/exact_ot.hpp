#pragma once

#include <vector>

#include "gwdetours/measures.hpp"

namespace gwd {

/// Result of the discrete Kantorovich LP: the optimal plan, its cost <C, plan>,
/// and dual potentials (u, v) with u_i + v_j <= C_ij on every cell and equality
/// on the support, which certifies optimality independently of the solver.
struct TransportResult {
  Coupling coupling;
  double value = 0.0;
  Vector row_potential;
  Vector col_potential;
};

/// Exact solution of min <C, plan> over plans with marginals p and q.
/// Network simplex on the bipartite transportation graph with an artificial
/// root (big-M start, strongly feasible trees, block-search pricing).
/// Atoms lighter than 1e-15 are dropped before solving and get zero rows/columns.
TransportResult solve_kantorovich(const Matrix& cost, const Vector& p, const Vector& q);

/// Orders indices by value; equal values keep ascending index order.
std::vector<Eigen::Index> sorted_order(const Vector& values, bool descending = false);

/// North-west corner rule over the given visiting orders; the monotone plan
/// when the orders sort the supports.
Matrix north_west_corner(const Vector& p, const std::vector<Eigen::Index>& row_order,
                         const Vector& q, const std::vector<Eigen::Index>& col_order);

/// Increasing rearrangement between two 1D measures (optimal for |x - y|^2).
Coupling wasserstein_1d_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Squared-Euclidean cost matrix between two point sets with equal dimension.
Matrix squared_euclidean_cost(const Matrix& x, const Matrix& y);

}  // namespace gwd
