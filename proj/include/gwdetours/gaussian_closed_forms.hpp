#pragma once

#include <optional>

#include "gwdetours/measures.hpp"

namespace gwd {

/// x -> linear x + offset.
struct AffineMap {
  Matrix linear;
  Vector offset;

  Vector operator()(const Vector& x) const { return linear * x + offset; }
};

/// A covariance written in the basis [V_E | V_E-perp] of E + E-perp.
struct BlockPartition {
  Matrix sigma_e;    // k x k
  Matrix sigma_eep;  // k x (p-k)
  Matrix sigma_epe;  // (p-k) x k
  Matrix sigma_ep;   // (p-k) x (p-k)
};

BlockPartition partition_covariance(const Matrix& cov, const Subspace& e);

/// Sigma / Sigma_E = Sigma_E-perp - Sigma_EE-perp^T Sigma_E^{-1} Sigma_EE-perp,
/// the covariance of the Gaussian conditional on E. Requires min eig(Sigma_E) > 1e-12.
Matrix schur_complement(const BlockPartition& part);

/// Eigen-decomposition with eigenvalues sorted descending (ties keep solver
/// order) and every eigenvector signed so its largest-magnitude entry is positive.
struct SortedEigen {
  Vector values;
  Matrix vectors;
};
SortedEigen sorted_eigen(const Matrix& symmetric);

/// Gaussian-restricted GW map from N(m_mu, Sigma) in R^p to N(m_nu, Lambda) in
/// R^q, p >= q: T(x) = m_nu + P_nu A P_mu^T (x - m_mu) with
/// A = [diag(signs) D_nu^{1/2} (D_mu^{(q)})^{-1/2} | 0]. `signs` defaults to +1.
/// Covariance eigenvalues below 1e-12 are rejected.
AffineMap ggw_map(const GaussianMeasure& mu, const GaussianMeasure& nu,
                  const std::optional<Vector>& signs = std::nullopt);

/// Block-triangular Monge-Knothe map between Gaussians for subspaces E (of
/// R^p) and F (of R^q) of equal dimension k, p >= q.
struct MKGaussianMap {
  AffineMap map;     // in ambient coordinates: B = V_nu block V_mu^T
  Matrix block;      // B in the adapted bases, [[T_EF, 0], [C, T_perp]]
  Matrix t_ef;       // k x k
  Matrix t_perp;     // (q-k) x (p-k)
  Matrix c;          // (q-k) x k
};

MKGaussianMap mk_gaussian_map(const GaussianMeasure& mu, const GaussianMeasure& nu, const Subspace& e,
                              const Subspace& f);

/// Cross-covariance of the Monge-Independent plan between centered Gaussians:
/// C = (V_E Sigma_E + V_E-perp Sigma_E-perp,E) T^T (V_F^T + Lambda_F^{-1} Lambda_F-perp,F^T V_F-perp^T),
/// where T (k' x k) maps N(0, Sigma_E) to N(0, Lambda_F). Without an explicit T
/// the ggw_map between them is used.
Matrix mi_cross_covariance(const GaussianMeasure& mu, const GaussianMeasure& nu, const Subspace& e,
                           const Subspace& f, const std::optional<Matrix>& t_ef = std::nullopt);

/// pi_MI = N(0, Gamma), Gamma = [[Sigma, C], [C^T, Lambda]]. Requires zero
/// means and dim E >= dim F.
GaussianMeasure mi_gaussian_plan(const GaussianMeasure& mu, const GaussianMeasure& nu, const Subspace& e,
                                 const Subspace& f, const std::optional<Matrix>& t_ef = std::nullopt);

/// n draws from the Gaussian, one per row, via a symmetric square root of the covariance.
Matrix sample_gaussian(const GaussianMeasure& g, Eigen::Index n, Rng& rng);

}  // namespace gwd
