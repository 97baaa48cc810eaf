#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gwdetours/measures.hpp"

namespace gwd {

struct CGOptions {
  int max_iter = 1000;
  double tol = 1e-9;  // relative energy decrease below which the solve stops
};

/// Outcome of a conditional-gradient solve. energy_trace[0] is the energy of
/// the starting coupling and each further entry the energy after an accepted step.
struct CGReport {
  Coupling coupling;
  std::vector<double> energy_trace;
  int iterations = 0;
  bool converged = false;
};

/// Symmetric linear operator gamma -> L (x) gamma of a quadratic transport
/// energy E(gamma) = <L (x) gamma, gamma>. Must accept arbitrary matrices,
/// including differences of couplings with zero marginals.
using TensorProduct = std::function<Matrix(const Matrix&)>;

/// Frank-Wolfe over the transportation polytope Pi(p, q). Each step solves the
/// linearized problem exactly with the network simplex, then minimizes the
/// quadratic along the segment in closed form. A step that would raise the
/// energy is rejected and ends the solve, so the trace never increases.
CGReport conditional_gradient(const TensorProduct& tensor_product, const Vector& p,
                              const Vector& q, const std::optional<Coupling>& init,
                              const CGOptions& options);

}  // namespace gwd
