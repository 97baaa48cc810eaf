#include "gwdetours/measures.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include <Eigen/Eigenvalues>

namespace gwd {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::WeightSumOutOfTolerance: return "WeightSumOutOfTolerance";
    case ErrorCode::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NonFiniteEnergy: return "NonFiniteEnergy";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::NotCentered: return "NotCentered";
    case ErrorCode::EmptyConditional: return "EmptyConditional";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::IOError: return "IOError";
  }
  return "UnknownError";
}

int configured_threads() noexcept {
  const char* env = std::getenv("GWDETOURS_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 1) return 1;
  return static_cast<int>(std::min(v, 256L));
}

DiscreteMeasure make_discrete_measure(Matrix points, Vector weights) {
  if (points.rows() == 0 || weights.size() == 0) {
    throw Error(ErrorCode::EmptySupport, "measure needs at least one support point");
  }
  if (points.rows() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(points.rows()) + " points but " + std::to_string(weights.size()) +
                    " weights");
  }
  if (!points.allFinite() || !weights.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "points and weights must be finite");
  }
  if ((weights.array() < 0.0).any()) {
    throw Error(ErrorCode::NegativeWeight, "weights must be nonnegative");
  }
  const double total = weights.sum();
  if (std::abs(total - 1.0) > 1e-6) {
    throw Error(ErrorCode::WeightSumOutOfTolerance,
                "weights sum to " + std::to_string(total) + ", expected 1");
  }
  weights /= total;
  return DiscreteMeasure(std::move(points), std::move(weights));
}

DiscreteMeasure make_uniform_measure(Matrix points) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw Error(ErrorCode::EmptySupport, "measure needs at least one support point");
  return make_discrete_measure(std::move(points), Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Coupling::Coupling(Matrix plan, Vector row_marginal, Vector col_marginal)
    : plan_(std::move(plan)), row_(std::move(row_marginal)), col_(std::move(col_marginal)) {
  if (plan_.rows() != row_.size() || plan_.cols() != col_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coupling shape does not match its marginals");
  }
  if (!plan_.allFinite()) throw Error(ErrorCode::NonFiniteValue, "coupling has non-finite mass");
  // Rounding from solver updates can leave -1e-17 style entries.
  for (Eigen::Index j = 0; j < plan_.cols(); ++j) {
    for (Eigen::Index i = 0; i < plan_.rows(); ++i) {
      double& v = plan_(i, j);
      if (v < 0.0) {
        if (v < -1e-12) throw Error(ErrorCode::InvalidArgument, "coupling has negative mass");
        v = 0.0;
      }
    }
  }
  if (marginal_residual() > kMarginalTolerance) {
    throw Error(ErrorCode::InfeasibleMarginals,
                "coupling marginal residual " + std::to_string(marginal_residual()));
  }
}

Coupling Coupling::from_plan(Matrix plan) {
  Vector row = plan.rowwise().sum();
  Vector col = plan.colwise().sum().transpose();
  return Coupling(std::move(plan), std::move(row), std::move(col));
}

Coupling Coupling::product(const Vector& p, const Vector& q) {
  return Coupling(p * q.transpose(), p, q);
}

double Coupling::marginal_residual() const {
  const double r = (plan_.rowwise().sum() - row_).cwiseAbs().maxCoeff();
  const double c = (plan_.colwise().sum().transpose() - col_).cwiseAbs().maxCoeff();
  return std::max(r, c);
}

double total_variation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "total variation needs plans of equal shape");
  }
  return 0.5 * (a - b).cwiseAbs().sum();
}

GaussianMeasure::GaussianMeasure(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  const Eigen::Index p = mean_.size();
  if (p == 0) throw Error(ErrorCode::EmptySupport, "Gaussian needs dimension >= 1");
  if (cov_.rows() != p || cov_.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "covariance must be p x p for a p-dimensional mean");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "Gaussian parameters must be finite");
  }
  const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, cov_.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidArgument, "covariance is not symmetric");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw Error(ErrorCode::InvalidArgument, "covariance is not positive semidefinite");
  }
}

void canonicalize_sign(Eigen::Ref<Vector> v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best)) + 1e-12) best = i;
  }
  if (v(best) < 0.0) v = -v;
}

namespace {

// Orthogonalize `v` against the columns of `q` (two passes of classical GS).
Vector orthogonalize(const Matrix& q, Vector v) {
  for (int pass = 0; pass < 2; ++pass) {
    if (q.cols() > 0) v -= q * (q.transpose() * v);
  }
  return v;
}

Matrix orthonormal_completion(const Matrix& basis) {
  const Eigen::Index d = basis.rows();
  const Eigen::Index k = basis.cols();
  Matrix q = basis;
  Matrix complement(d, d - k);
  for (Eigen::Index c = 0; c < d - k; ++c) {
    // Greedy: the canonical axis with the largest residual, lowest index on ties.
    Vector best_v;
    double best_norm = -1.0;
    for (Eigen::Index axis = 0; axis < d; ++axis) {
      Vector v = orthogonalize(q, Vector::Unit(d, axis));
      const double nrm = v.norm();
      if (nrm > best_norm + 1e-12) {
        best_norm = nrm;
        best_v = std::move(v);
      }
    }
    best_v /= best_norm;
    complement.col(c) = best_v;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = best_v;
  }
  return complement;
}

}  // namespace

Subspace Subspace::from_spanning(const Matrix& spanning) {
  const Eigen::Index d = spanning.rows();
  const Eigen::Index k = spanning.cols();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "subspace needs ambient dimension >= 1");
  if (k > d) throw Error(ErrorCode::DimensionMismatch, "more spanning vectors than dimensions");
  if (!spanning.allFinite()) throw Error(ErrorCode::NonFiniteValue, "subspace basis not finite");
  Matrix basis(d, 0);
  for (Eigen::Index c = 0; c < k; ++c) {
    Vector v = orthogonalize(basis, spanning.col(c));
    const double nrm = v.norm();
    if (nrm <= 1e-10 * std::max(1.0, spanning.col(c).norm())) {
      throw Error(ErrorCode::InvalidArgument, "spanning vectors are linearly dependent");
    }
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v / nrm;
  }
  Matrix complement = orthonormal_completion(basis);
  return Subspace(std::move(basis), std::move(complement));
}

Subspace Subspace::coordinate_axes(Eigen::Index d, Eigen::Index k, Eigen::Index first) {
  if (k < 0 || first < 0 || first + k > d) {
    throw Error(ErrorCode::DimensionMismatch, "coordinate axes out of range");
  }
  Matrix spanning = Matrix::Zero(d, k);
  for (Eigen::Index c = 0; c < k; ++c) spanning(first + c, c) = 1.0;
  return from_spanning(spanning);
}

Subspace Subspace::from_bases(Matrix basis, Matrix complement) {
  const Eigen::Index d = basis.rows();
  if (complement.rows() != d || basis.cols() + complement.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "basis and complement do not tile R^d");
  }
  Matrix full(d, d);
  full << basis, complement;
  const double err = (full.transpose() * full - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (err > 1e-10) throw Error(ErrorCode::InvalidArgument, "bases are not orthonormal");
  return Subspace(std::move(basis), std::move(complement));
}

Matrix Subspace::full_basis() const {
  Matrix full(ambient_dim(), ambient_dim());
  full << basis_, complement_;
  return full;
}

DiscreteMeasure project_measure(const DiscreteMeasure& mu, const Subspace& subspace) {
  if (mu.dim() != subspace.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measure dimension differs from subspace ambient dimension");
  }
  return make_discrete_measure(mu.points() * subspace.basis(), mu.weights());
}

SplitCoordinates split_coordinates(const DiscreteMeasure& mu, const Subspace& subspace) {
  DiscreteMeasure on = project_measure(mu, subspace);
  return {std::move(on), mu.points() * subspace.complement()};
}

Matrix reassemble(const Matrix& subspace_coords, const Matrix& complement_coords,
                  const Subspace& subspace) {
  if (subspace_coords.cols() != subspace.dim() ||
      complement_coords.cols() != subspace.complement().cols() ||
      subspace_coords.rows() != complement_coords.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "coordinate blocks do not match the subspace");
  }
  return subspace_coords * subspace.basis().transpose() +
         complement_coords * subspace.complement().transpose();
}

Subspace pca_subspace(const DiscreteMeasure& mu, Eigen::Index k) {
  const Eigen::Index d = mu.dim();
  if (k < 1 || k > d) throw Error(ErrorCode::DimensionMismatch, "PCA dimension out of range");
  const Matrix centered_pts = mu.points().rowwise() - mu.mean().transpose();
  const Matrix cov = centered_pts.transpose() * mu.weights().asDiagonal() * centered_pts;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  // Eigen returns ascending eigenvalues.
  Matrix axes(d, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Vector v = eig.eigenvectors().col(d - 1 - c);
    canonicalize_sign(v);
    axes.col(c) = v;
  }
  return Subspace::from_spanning(axes);
}

DiscreteMeasure centered(const DiscreteMeasure& mu) {
  return make_discrete_measure(mu.points().rowwise() - mu.mean().transpose(), mu.weights());
}

}  // namespace gwd
