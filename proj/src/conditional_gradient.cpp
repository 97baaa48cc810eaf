#include "gwdetours/conditional_gradient.hpp"

#include <algorithm>
#include <cmath>

#include "gwdetours/exact_ot.hpp"

namespace gwd {

namespace {

double frobenius_dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

double checked_energy(double e) {
  if (!std::isfinite(e)) throw Error(ErrorCode::NonFiniteEnergy, "energy is not finite");
  return e;
}

}  // namespace

CGReport conditional_gradient(const TensorProduct& tensor_product, const Vector& p,
                              const Vector& q, const std::optional<Coupling>& init,
                              const CGOptions& options) {
  if (options.max_iter < 0) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 0");
  if (!(options.tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be >= 0");
  if (std::abs(p.sum() - q.sum()) > Coupling::kMarginalTolerance) {
    throw Error(ErrorCode::InfeasibleMarginals, "marginals carry different mass");
  }
  Matrix gamma;
  if (init) {
    if (init->rows() != p.size() || init->cols() != q.size()) {
      throw Error(ErrorCode::DimensionMismatch, "initial coupling has the wrong shape");
    }
    const double residual = std::max((init->matrix().rowwise().sum() - p).lpNorm<Eigen::Infinity>(),
                                     (init->matrix().colwise().sum().transpose() - q).lpNorm<Eigen::Infinity>());
    if (residual > Coupling::kMarginalTolerance) {
      throw Error(ErrorCode::InfeasibleMarginals, "initial coupling does not match the marginals");
    }
    gamma = init->matrix();
  } else {
    gamma = p * q.transpose();
  }

  Matrix t_gamma = tensor_product(gamma);
  double energy = checked_energy(frobenius_dot(t_gamma, gamma));
  CGReport report{Coupling(gamma, p, q), {energy}, 0, false};

  for (int it = 0; it < options.max_iter; ++it) {
    const Matrix grad = 2.0 * t_gamma;
    const Matrix vertex = solve_kantorovich(grad, p, q).coupling.matrix();
    const Matrix direction = vertex - gamma;
    const double b = frobenius_dot(grad, direction);
    if (!(b < 0.0)) {
      report.converged = true;
      break;
    }
    const Matrix t_direction = tensor_product(direction);
    const double a = checked_energy(frobenius_dot(t_direction, direction));
    double tau;
    if (a > 0.0) {
      tau = std::clamp(-b / (2.0 * a), 0.0, 1.0);
    } else {
      tau = a + b < 0.0 ? 1.0 : 0.0;
    }
    if (tau <= 0.0) {
      report.converged = true;
      break;
    }
    Matrix next = gamma + tau * direction;
    Matrix t_next = t_gamma + tau * t_direction;
    const double next_energy = checked_energy(frobenius_dot(t_next, next));
    if (next_energy > energy) {
      report.converged = true;
      break;
    }
    const double decrease = energy - next_energy;
    gamma = std::move(next);
    t_gamma = std::move(t_next);
    const double previous = energy;
    energy = next_energy;
    report.energy_trace.push_back(energy);
    report.iterations = it + 1;
    if (decrease <= options.tol * std::abs(previous)) {
      report.converged = true;
      break;
    }
  }
  report.coupling = Coupling(gamma.cwiseMax(0.0), p, q);
  return report;
}

}  // namespace gwd
