#include "gwdetours/hadamard.hpp"

#include <algorithm>
#include <cmath>

namespace gwd {

HWInstance::HWInstance(Matrix x, Matrix y, Vector p, Vector q, Vector lambda_weights)
    : x_(std::move(x)), y_(std::move(y)), p_(std::move(p)), q_(std::move(q)), lambda_(std::move(lambda_weights)) {
  if (x_.cols() != y_.cols()) throw Error(ErrorCode::DimensionMismatch, "point sets differ in dimension");
  if (x_.rows() != p_.size() || y_.rows() != q_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "masses do not match point counts");
  }
  if (lambda_.size() != x_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "lambda_weights must have one entry per coordinate");
  }
  if (x_.rows() == 0 || y_.rows() == 0 || x_.cols() == 0) {
    throw Error(ErrorCode::EmptySupport, "empty HW instance");
  }
  if (!x_.allFinite() || !y_.allFinite() || !p_.allFinite() || !q_.allFinite() || !lambda_.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "HW instance has non-finite entries");
  }
  if ((p_.array() < 0.0).any() || (q_.array() < 0.0).any()) {
    throw Error(ErrorCode::NegativeWeight, "negative mass in HW instance");
  }
  if (lambda_(0) != 1.0) throw Error(ErrorCode::InvalidArgument, "lambda_weights[0] must be 1");
  if ((lambda_.array() <= 0.0).any()) throw Error(ErrorCode::InvalidArgument, "lambda_weights must be positive");
}

HWInstance::HWInstance(Matrix x, Matrix y, Vector p, Vector q)
    : HWInstance(x, y, p, q, Vector::Ones(x.cols())) {}

HWInstance HWInstance::with_weights(Vector lambda_weights) const {
  return HWInstance(x_, y_, p_, q_, std::move(lambda_weights));
}

Vector degenerate_weights(Eigen::Index d, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "t must be positive");
  Vector w(d);
  double v = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    w(i) = std::max(v, 1e-18);
    v *= t;
  }
  return w;
}

Matrix hw_tensor_product(const HWInstance& inst, const Matrix& gamma) {
  const Matrix& x = inst.x();
  const Matrix& y = inst.y();
  if (gamma.rows() != x.rows() || gamma.cols() != y.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "coupling shape does not match HW instance");
  }
  const Vector p = gamma.rowwise().sum();
  const Vector q = gamma.colwise().sum().transpose();
  const Matrix x2 = x.cwiseProduct(x);
  const Matrix y2 = y.cwiseProduct(y);
  const Vector& w = inst.lambda_weights();
  // a_i = sum_t A_t x_i[t]^2 (sum_k x_k[t]^2 p_k), b_j analogous.
  const Vector a = x2 * w.cwiseProduct(x2.transpose() * p);
  const Vector b = y2 * w.cwiseProduct(y2.transpose() * q);
  // s_t = x_t^T gamma y_t
  const Vector s = (x.transpose() * gamma * y).diagonal();
  Matrix out = -2.0 * (x * w.cwiseProduct(s).asDiagonal() * y.transpose());
  out.colwise() += a;
  out.rowwise() += b.transpose();
  return out;
}

double hw_energy(const HWInstance& inst, const Matrix& gamma) {
  return (hw_tensor_product(inst, gamma).array() * gamma.array()).sum();
}

double hw_energy(const HWInstance& inst, const Coupling& gamma) { return hw_energy(inst, gamma.matrix()); }

CGReport solve_hw(const HWInstance& inst, const std::optional<Coupling>& init, const CGOptions& options) {
  auto tensor = [&inst](const Matrix& g) { return hw_tensor_product(inst, g); };
  return conditional_gradient(tensor, inst.p(), inst.q(), init, options);
}

std::vector<CGReport> hw_t_schedule(const HWInstance& base, const std::vector<double>& t_values,
                                    const CGOptions& options) {
  if (t_values.empty()) throw Error(ErrorCode::InvalidArgument, "empty t schedule");
  for (std::size_t i = 0; i < t_values.size(); ++i) {
    if (!(t_values[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "t values must be positive");
    if (i > 0 && !(t_values[i] < t_values[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "t values must be strictly decreasing");
    }
  }
  std::vector<CGReport> out;
  std::optional<Coupling> warm;
  for (double t : t_values) {
    const HWInstance inst = base.with_weights(degenerate_weights(base.dim(), t));
    out.push_back(solve_hw(inst, warm, options));
    warm = out.back().coupling;
  }
  return out;
}

}  // namespace gwd
