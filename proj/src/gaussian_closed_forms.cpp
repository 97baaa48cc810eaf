#include "gwdetours/gaussian_closed_forms.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

namespace gwd {

namespace {

constexpr double kMinEigenvalue = 1e-12;

void check_subspace(const Subspace& s, Eigen::Index ambient, const char* what) {
  if (s.ambient_dim() != ambient) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " lives in the wrong ambient space");
  }
}

Matrix inverse_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularBlock, "block is not positive definite");
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

void require_definite(const Matrix& m, ErrorCode code, const char* what) {
  if (m.rows() == 0) return;
  const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (!(lo > kMinEigenvalue)) throw Error(code, std::string(what) + " is not positive definite");
}

}  // namespace

BlockPartition partition_covariance(const Matrix& cov, const Subspace& e) {
  check_subspace(e, cov.rows(), "subspace");
  const Matrix& ve = e.basis();
  const Matrix& vp = e.complement();
  return {ve.transpose() * cov * ve, ve.transpose() * cov * vp, vp.transpose() * cov * ve,
          vp.transpose() * cov * vp};
}

Matrix schur_complement(const BlockPartition& part) {
  require_definite(part.sigma_e, ErrorCode::SingularBlock, "Sigma_E");
  const Matrix s = part.sigma_ep - part.sigma_eep.transpose() * inverse_spd(part.sigma_e) * part.sigma_eep;
  return 0.5 * (s + s.transpose());
}

SortedEigen sorted_eigen(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "eigen-decomposition failed");
  const Eigen::Index n = symmetric.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });
  SortedEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index c = 0; c < n; ++c) {
    out.values(c) = es.eigenvalues()(order[static_cast<std::size_t>(c)]);
    out.vectors.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
    canonicalize_sign(out.vectors.col(c));
  }
  return out;
}

AffineMap ggw_map(const GaussianMeasure& mu, const GaussianMeasure& nu, const std::optional<Vector>& signs) {
  const Eigen::Index p = mu.dim();
  const Eigen::Index q = nu.dim();
  if (q > p) throw Error(ErrorCode::DimensionMismatch, "ggw_map needs dim(mu) >= dim(nu)");
  const Vector s = signs ? *signs : Vector::Ones(q);
  if (s.size() != q) throw Error(ErrorCode::DimensionMismatch, "sign pattern must have length dim(nu)");
  if (((s.array() != 1.0) && (s.array() != -1.0)).any()) {
    throw Error(ErrorCode::InvalidArgument, "sign pattern entries must be +1 or -1");
  }
  const SortedEigen em = sorted_eigen(mu.covariance());
  const SortedEigen en = sorted_eigen(nu.covariance());
  if (p > 0 && em.values.minCoeff() < kMinEigenvalue) {
    throw Error(ErrorCode::DegenerateCovariance, "source covariance is singular");
  }
  if (q > 0 && en.values.minCoeff() < kMinEigenvalue) {
    throw Error(ErrorCode::DegenerateCovariance, "target covariance is singular");
  }
  Matrix a = Matrix::Zero(q, p);
  for (Eigen::Index i = 0; i < q; ++i) a(i, i) = s(i) * std::sqrt(en.values(i) / em.values(i));
  AffineMap out;
  out.linear = en.vectors * a * em.vectors.transpose();
  out.offset = nu.mean() - out.linear * mu.mean();
  return out;
}

MKGaussianMap mk_gaussian_map(const GaussianMeasure& mu, const GaussianMeasure& nu, const Subspace& e,
                              const Subspace& f) {
  const Eigen::Index p = mu.dim();
  const Eigen::Index q = nu.dim();
  check_subspace(e, p, "E");
  check_subspace(f, q, "F");
  if (q > p) throw Error(ErrorCode::DimensionMismatch, "Monge-Knothe map needs p >= q");
  if (e.dim() != f.dim()) throw Error(ErrorCode::DimensionMismatch, "Monge-Knothe map needs dim E = dim F");
  const Eigen::Index k = e.dim();

  const BlockPartition sp = partition_covariance(mu.covariance(), e);
  const BlockPartition lp = partition_covariance(nu.covariance(), f);
  require_definite(sp.sigma_e, ErrorCode::SingularBlock, "Sigma_E");
  require_definite(lp.sigma_e, ErrorCode::SingularBlock, "Lambda_F");

  auto centered_gaussian = [](const Matrix& cov) { return GaussianMeasure(Vector::Zero(cov.rows()), cov); };
  MKGaussianMap out;
  out.t_ef = ggw_map(centered_gaussian(sp.sigma_e), centered_gaussian(lp.sigma_e)).linear;
  if (q > k) {
    out.t_perp = ggw_map(centered_gaussian(schur_complement(sp)), centered_gaussian(schur_complement(lp))).linear;
    const Matrix t_inv_t = out.t_ef.transpose().inverse();
    out.c = (lp.sigma_epe * t_inv_t - out.t_perp * sp.sigma_epe) * inverse_spd(sp.sigma_e);
  } else {
    out.t_perp = Matrix::Zero(0, p - k);
    out.c = Matrix::Zero(0, k);
  }
  out.block = Matrix::Zero(q, p);
  out.block.topLeftCorner(k, k) = out.t_ef;
  out.block.bottomLeftCorner(q - k, k) = out.c;
  out.block.bottomRightCorner(q - k, p - k) = out.t_perp;
  out.map.linear = f.full_basis() * out.block * e.full_basis().transpose();
  out.map.offset = nu.mean() - out.map.linear * mu.mean();
  return out;
}

Matrix mi_cross_covariance(const GaussianMeasure& mu, const GaussianMeasure& nu, const Subspace& e,
                           const Subspace& f, const std::optional<Matrix>& t_ef) {
  check_subspace(e, mu.dim(), "E");
  check_subspace(f, nu.dim(), "F");
  if (e.dim() < f.dim()) throw Error(ErrorCode::DimensionMismatch, "Monge-Independent plan needs dim E >= dim F");
  const BlockPartition sp = partition_covariance(mu.covariance(), e);
  const BlockPartition lp = partition_covariance(nu.covariance(), f);
  require_definite(lp.sigma_e, ErrorCode::SingularBlock, "Lambda_F");
  Matrix t;
  if (t_ef) {
    t = *t_ef;
    if (t.rows() != f.dim() || t.cols() != e.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "T_EF must be dim F x dim E");
    }
  } else {
    t = ggw_map(GaussianMeasure(Vector::Zero(e.dim()), sp.sigma_e), GaussianMeasure(Vector::Zero(f.dim()), lp.sigma_e))
            .linear;
  }
  const Matrix left = e.basis() * sp.sigma_e + e.complement() * sp.sigma_epe;
  const Matrix right = f.basis().transpose() + inverse_spd(lp.sigma_e) * lp.sigma_epe.transpose() * f.complement().transpose();
  return left * t.transpose() * right;
}

GaussianMeasure mi_gaussian_plan(const GaussianMeasure& mu, const GaussianMeasure& nu, const Subspace& e,
                                 const Subspace& f, const std::optional<Matrix>& t_ef) {
  if (mu.mean().cwiseAbs().maxCoeff() > 0.0 || nu.mean().cwiseAbs().maxCoeff() > 0.0) {
    throw Error(ErrorCode::NotCentered, "Monge-Independent closed form needs centered Gaussians");
  }
  const Matrix c = mi_cross_covariance(mu, nu, e, f, t_ef);
  const Eigen::Index p = mu.dim();
  const Eigen::Index q = nu.dim();
  Matrix gamma(p + q, p + q);
  gamma.topLeftCorner(p, p) = mu.covariance();
  gamma.topRightCorner(p, q) = c;
  gamma.bottomLeftCorner(q, p) = c.transpose();
  gamma.bottomRightCorner(q, q) = nu.covariance();
  return GaussianMeasure(Vector::Zero(p + q), std::move(gamma));
}

Matrix sample_gaussian(const GaussianMeasure& g, Eigen::Index n, Rng& rng) {
  const SortedEigen es = sorted_eigen(g.covariance());
  const Matrix root = es.vectors * es.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Matrix z(n, g.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < g.dim(); ++c) z(i, c) = rng.normal();
  }
  Matrix out = z * root.transpose();
  out.rowwise() += g.mean().transpose();
  return out;
}

}  // namespace gwd
