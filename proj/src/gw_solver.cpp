#include "gwdetours/gw_solver.hpp"

#include <algorithm>

#include "gwdetours/exact_ot.hpp"

namespace gwd {

namespace {

void check_shapes(const SimilarityMatrix& cx, const SimilarityMatrix& cy, const Matrix& gamma) {
  if (gamma.rows() != cx.size() || gamma.cols() != cy.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coupling shape does not match similarity matrices");
  }
}

}  // namespace

SimilarityMatrix::SimilarityMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "similarity matrix must be square");
  }
  if (entries_.size() == 0) throw Error(ErrorCode::EmptySupport, "empty similarity matrix");
  if (!entries_.allFinite()) throw Error(ErrorCode::NonFiniteValue, "similarity matrix is not finite");
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorCode::InvalidArgument, "similarity matrix is not symmetric");
  }
  entries_ = (0.5 * (entries_ + entries_.transpose())).eval();
}

SimilarityMatrix squared_distance_similarity(const Matrix& points) {
  Matrix d = squared_euclidean_cost(points, points);
  d.diagonal().setZero();
  return SimilarityMatrix(std::move(d));
}

SimilarityMatrix inner_product_similarity(const Matrix& points) {
  return SimilarityMatrix(points * points.transpose());
}

Matrix gw_tensor_product(const SimilarityMatrix& cx, const SimilarityMatrix& cy, const Matrix& gamma) {
  check_shapes(cx, cy, gamma);
  const Matrix& a = cx.matrix();
  const Matrix& b = cy.matrix();
  const Vector p = gamma.rowwise().sum();
  const Vector q = gamma.colwise().sum().transpose();
  const Vector left = a.cwiseProduct(a) * p;
  const Vector right = b.cwiseProduct(b) * q;
  Matrix out = -2.0 * (a * gamma * b.transpose());
  out.colwise() += left;
  out.rowwise() += right.transpose();
  return out;
}

double gw_energy(const SimilarityMatrix& cx, const SimilarityMatrix& cy, const Matrix& gamma) {
  return (gw_tensor_product(cx, cy, gamma).array() * gamma.array()).sum();
}

double gw_energy(const SimilarityMatrix& cx, const SimilarityMatrix& cy, const Coupling& gamma) {
  return gw_energy(cx, cy, gamma.matrix());
}

CGReport solve_gw_cg(const SimilarityMatrix& cx, const SimilarityMatrix& cy, const Vector& p,
                     const Vector& q, const std::optional<Coupling>& init, const CGOptions& options) {
  if (p.size() != cx.size() || q.size() != cy.size()) {
    throw Error(ErrorCode::DimensionMismatch, "marginals do not match similarity matrices");
  }
  // Squared similarities are loop invariants; precompute them once.
  const Matrix a = cx.matrix();
  const Matrix b = cy.matrix();
  const Matrix a2 = a.cwiseProduct(a);
  const Matrix b2 = b.cwiseProduct(b);
  auto tensor = [&](const Matrix& g) {
    const Vector gp = g.rowwise().sum();
    const Vector gq = g.colwise().sum().transpose();
    Matrix out = -2.0 * (a * g * b);  // b is symmetric
    out.colwise() += a2 * gp;
    out.rowwise() += (b2 * gq).transpose();
    return out;
  };
  return conditional_gradient(tensor, p, q, init, options);
}

}  // namespace gwd
