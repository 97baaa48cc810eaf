#pragma once

#include <optional>
#include <vector>

#include "gwdetours/conditional_gradient.hpp"
#include "gwdetours/measures.hpp"

namespace gwd {

/// Hadamard-Wasserstein problem between X (n x d, masses p) and Y (m x d,
/// masses q) with coordinate weights A = diag(lambda_weights):
///   E(gamma) = sum_{i,j,k,l} sum_t A_t (x_i[t] x_k[t] - y_j[t] y_l[t])^2 gamma[i,j] gamma[k,l].
/// lambda_weights[0] must be 1 and every weight positive.
class HWInstance {
 public:
  HWInstance(Matrix x, Matrix y, Vector p, Vector q, Vector lambda_weights);

  /// Unit weights: the plain HW cost.
  HWInstance(Matrix x, Matrix y, Vector p, Vector q);

  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }
  const Vector& p() const noexcept { return p_; }
  const Vector& q() const noexcept { return q_; }
  const Vector& lambda_weights() const noexcept { return lambda_; }
  Eigen::Index dim() const noexcept { return x_.cols(); }

  /// Same data with other coordinate weights.
  HWInstance with_weights(Vector lambda_weights) const;

 private:
  Matrix x_, y_;
  Vector p_, q_, lambda_;
};

/// diag(1, t, t^2, ..., t^{d-1}), each entry floored at 1e-18.
Vector degenerate_weights(Eigen::Index d, double t);

/// L (x) gamma for the weighted HW cost. With x_t, y_t the t-th coordinate
/// columns the rank-one structure of X_t = x_t x_t^T gives
///   sum_t A_t [ (x_t^2)(x_t^2 . p) 1^T + 1 (y_t^2 . q)(y_t^2)^T - 2 (x_t^T gamma y_t) x_t y_t^T ],
/// O(d n m) per call. Linear in gamma; p, q are gamma's own sums.
Matrix hw_tensor_product(const HWInstance& inst, const Matrix& gamma);

double hw_energy(const HWInstance& inst, const Matrix& gamma);
double hw_energy(const HWInstance& inst, const Coupling& gamma);

/// Conditional gradient on the HW energy; same contract as solve_gw_cg.
CGReport solve_hw(const HWInstance& inst, const std::optional<Coupling>& init = std::nullopt,
                  const CGOptions& options = {});

/// Solves HW_t for each t (strictly decreasing, positive) with weights
/// degenerate_weights(d, t), warm-starting every solve from the previous one.
std::vector<CGReport> hw_t_schedule(const HWInstance& base, const std::vector<double>& t_values,
                                    const CGOptions& options = {});

}  // namespace gwd
