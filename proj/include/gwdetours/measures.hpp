#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "gwdetours/core.hpp"

namespace gwd {

/// Weighted point cloud: n support points in R^d with masses on the simplex.
/// Immutable once built; construct through make_discrete_measure.
class DiscreteMeasure {
 public:
  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  Eigen::Index size() const noexcept { return points_.rows(); }
  Eigen::Index dim() const noexcept { return points_.cols(); }

  Vector mean() const { return points_.transpose() * weights_; }

 private:
  DiscreteMeasure(Matrix points, Vector weights)
      : points_(std::move(points)), weights_(std::move(weights)) {}

  friend DiscreteMeasure make_discrete_measure(Matrix points, Vector weights);

  Matrix points_;
  Vector weights_;
};

/// Validates and builds a measure. Weights within 1e-6 of unit mass are
/// renormalized; anything further off is rejected.
DiscreteMeasure make_discrete_measure(Matrix points, Vector weights);

/// Uniform weights 1/n.
DiscreteMeasure make_uniform_measure(Matrix points);

/// Nonnegative n x m transport plan together with the marginals it carries.
class Coupling {
 public:
  static constexpr double kMarginalTolerance = 1e-9;

  /// Checks nonnegativity and that the row/column sums match p and q.
  Coupling(Matrix plan, Vector row_marginal, Vector col_marginal);

  /// Takes the marginals from the plan's own row and column sums.
  static Coupling from_plan(Matrix plan);

  static Coupling product(const Vector& p, const Vector& q);

  const Matrix& matrix() const noexcept { return plan_; }
  const Vector& row_marginal() const noexcept { return row_; }
  const Vector& col_marginal() const noexcept { return col_; }
  Eigen::Index rows() const noexcept { return plan_.rows(); }
  Eigen::Index cols() const noexcept { return plan_.cols(); }

  /// max(|plan 1 - p|_inf, |plan^T 1 - q|_inf)
  double marginal_residual() const;

 private:
  Matrix plan_;
  Vector row_;
  Vector col_;
};

/// Half the L1 distance between two plans of equal shape.
double total_variation(const Matrix& a, const Matrix& b);

/// Mean vector plus symmetric PSD covariance.
class GaussianMeasure {
 public:
  GaussianMeasure(Vector mean, Matrix covariance);

  const Vector& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return cov_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
};

/// Orthonormal basis of a k-dimensional subspace E of R^d, carried with an
/// orthonormal basis of E-perp so that [basis | complement] is orthogonal.
class Subspace {
 public:
  /// Orthonormalizes the columns of `spanning` (Gram-Schmidt, column order and
  /// direction preserved) and completes them with canonical axes.
  static Subspace from_spanning(const Matrix& spanning);

  /// span(e_{first}, ..., e_{first+k-1}) in R^d.
  static Subspace coordinate_axes(Eigen::Index d, Eigen::Index k, Eigen::Index first = 0);

  /// Takes both bases as given; they must already form an orthogonal matrix.
  static Subspace from_bases(Matrix basis, Matrix complement);

  const Matrix& basis() const noexcept { return basis_; }
  const Matrix& complement() const noexcept { return complement_; }
  Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }
  Eigen::Index dim() const noexcept { return basis_.cols(); }

  /// [basis | complement], a d x d orthogonal matrix.
  Matrix full_basis() const;

 private:
  Subspace(Matrix basis, Matrix complement)
      : basis_(std::move(basis)), complement_(std::move(complement)) {}

  Matrix basis_;
  Matrix complement_;
};

/// Pushforward by x -> basis^T x. Weights are carried over unchanged.
DiscreteMeasure project_measure(const DiscreteMeasure& mu, const Subspace& subspace);

struct SplitCoordinates {
  DiscreteMeasure on_subspace;  // basis^T x_i
  Matrix complement_coords;     // n x (d-k), complement^T x_i
};

SplitCoordinates split_coordinates(const DiscreteMeasure& mu, const Subspace& subspace);

/// Inverse of split_coordinates: rows are basis * a_i + complement * b_i.
Matrix reassemble(const Matrix& subspace_coords, const Matrix& complement_coords,
                  const Subspace& subspace);

/// Leading principal axes of the weighted covariance, eigenvalues descending.
/// Each axis is signed so that its largest-magnitude entry is positive.
Subspace pca_subspace(const DiscreteMeasure& mu, Eigen::Index k);

/// The measure translated so its weighted mean is the origin.
DiscreteMeasure centered(const DiscreteMeasure& mu);

/// Sign convention for eigenvectors and principal axes used across the library.
void canonicalize_sign(Eigen::Ref<Vector> v);

}  // namespace gwd
