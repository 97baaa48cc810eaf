#pragma once

#include <optional>

#include "gwdetours/conditional_gradient.hpp"
#include "gwdetours/measures.hpp"

namespace gwd {

/// Symmetric intra-space similarity (pairwise squared distances, inner
/// products, adjacency weights). Symmetry is checked to 1e-10 relative to the
/// largest entry and then enforced exactly.
class SimilarityMatrix {
 public:
  explicit SimilarityMatrix(Matrix entries);

  const Matrix& matrix() const noexcept { return entries_; }
  Eigen::Index size() const noexcept { return entries_.rows(); }

 private:
  Matrix entries_;
};

/// ||x_i - x_k||^2 over the rows of `points`.
SimilarityMatrix squared_distance_similarity(const Matrix& points);

/// <x_i, x_k> over the rows of `points`.
SimilarityMatrix inner_product_similarity(const Matrix& points);

/// (L (x) gamma)[i,j] = sum_{k,l} (Cx[i,k] - Cy[j,l])^2 gamma[k,l], computed as
/// (Cx o Cx) p 1^T + 1 q^T (Cy o Cy)^T - 2 Cx gamma Cy^T with p, q the row and
/// column sums of gamma. Linear in gamma; any n x m matrix is accepted.
Matrix gw_tensor_product(const SimilarityMatrix& cx, const SimilarityMatrix& cy, const Matrix& gamma);

/// sum_{i,j,k,l} (Cx[i,k] - Cy[j,l])^2 gamma[i,j] gamma[k,l] = <L (x) gamma, gamma>.
double gw_energy(const SimilarityMatrix& cx, const SimilarityMatrix& cy, const Matrix& gamma);
double gw_energy(const SimilarityMatrix& cx, const SimilarityMatrix& cy, const Coupling& gamma);

/// Square-loss GW between (Cx, p) and (Cy, q) by conditional gradient with
/// gradient 2 (L (x) gamma). Starts from p q^T unless `init` is given.
CGReport solve_gw_cg(const SimilarityMatrix& cx, const SimilarityMatrix& cy, const Vector& p,
                     const Vector& q, const std::optional<Coupling>& init = std::nullopt,
                     const CGOptions& options = {});

}  // namespace gwd
