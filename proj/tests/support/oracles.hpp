// Test-only reference computations. Each one follows the definition directly
// (explicit sums, enumeration, textbook identities) and shares no code with
// the library beyond the Eigen types and the Rng.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "gwdetours/core.hpp"

namespace oracle {

using gwd::Matrix;
using gwd::Vector;
using Perm = std::vector<int>;

// (L (x) g)[i,j] = sum_{k,l} (cx[i,k] - cy[j,l])^2 g[k,l]
inline Matrix gw_tensor(const Matrix& cx, const Matrix& cy, const Matrix& g) {
  Matrix out = Matrix::Zero(g.rows(), g.cols());
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      for (Eigen::Index k = 0; k < g.rows(); ++k)
        for (Eigen::Index l = 0; l < g.cols(); ++l) {
          const double diff = cx(i, k) - cy(j, l);
          out(i, j) += diff * diff * g(k, l);
        }
  return out;
}

inline double gw_energy(const Matrix& cx, const Matrix& cy, const Matrix& g) {
  return (gw_tensor(cx, cy, g).array() * g.array()).sum();
}

// sum_t lambda_t (x_i[t] x_k[t] - y_j[t] y_l[t])^2 per (i,j), contracted with g
inline Matrix hw_tensor(const Matrix& x, const Matrix& y, const Vector& lambda, const Matrix& g) {
  Matrix out = Matrix::Zero(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < y.rows(); ++j)
      for (Eigen::Index k = 0; k < x.rows(); ++k)
        for (Eigen::Index l = 0; l < y.rows(); ++l) {
          double loss = 0.0;
          for (Eigen::Index t = 0; t < x.cols(); ++t) {
            const double diff = x(i, t) * x(k, t) - y(j, t) * y(l, t);
            loss += lambda(t) * diff * diff;
          }
          out(i, j) += loss * g(k, l);
        }
  return out;
}

inline double hw_energy(const Matrix& x, const Matrix& y, const Vector& lambda, const Matrix& g) {
  return (hw_tensor(x, y, lambda, g).array() * g.array()).sum();
}

inline Matrix permutation_plan(const Perm& perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Matrix plan = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) plan(i, perm[i]) = 1.0 / static_cast<double>(n);
  return plan;
}

struct PermMin {
  double value = std::numeric_limits<double>::infinity();
  Perm perm;
};

// Minimum of cost(plan) over all uniform permutation plans of size n.
inline PermMin min_over_permutations(int n, const std::function<double(const Matrix&)>& cost) {
  Perm perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  PermMin best;
  do {
    const double c = cost(permutation_plan(perm));
    if (c < best.value) best = {c, perm};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline Perm random_permutation(int n, gwd::Rng& rng) {
  Perm perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return perm;
}

// North-west corner over explicit visiting orders; always feasible.
inline Matrix nw_corner(const Vector& p, const Perm& rows, const Vector& q, const Perm& cols) {
  Matrix plan = Matrix::Zero(p.size(), q.size());
  std::size_t a = 0, b = 0;
  double ra = p(rows[0]), rb = q(cols[0]);
  while (a < rows.size() && b < cols.size()) {
    const double m = std::min(ra, rb);
    plan(rows[a], cols[b]) += m;
    ra -= m;
    rb -= m;
    if (ra <= rb) {
      if (++a < rows.size()) ra = p(rows[a]);
    } else {
      if (++b < cols.size()) rb = q(cols[b]);
    }
  }
  return plan;
}

// Random point of the transportation polytope: a convex mixture of
// north-west-corner vertices over random orders (Birkhoff mixture when uniform).
inline Matrix random_coupling(const Vector& p, const Vector& q, gwd::Rng& rng, int vertices = 4) {
  Matrix plan = Matrix::Zero(p.size(), q.size());
  std::vector<double> mix(vertices);
  double total = 0.0;
  for (auto& w : mix) total += (w = rng.uniform() + 1e-3);
  for (int v = 0; v < vertices; ++v) {
    plan += (mix[v] / total) *
            nw_corner(p, random_permutation(static_cast<int>(p.size()), rng), q,
                      random_permutation(static_cast<int>(q.size()), rng));
  }
  return plan;
}

inline Matrix gaussian_matrix(Eigen::Index r, Eigen::Index c, gwd::Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

inline Vector random_simplex(Eigen::Index n, gwd::Rng& rng) {
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = 0.05 + rng.uniform();
  return w / w.sum();
}

inline Matrix random_orthogonal(Eigen::Index n, gwd::Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, n, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

inline Matrix random_spd(Eigen::Index n, gwd::Rng& rng, double floor = 0.1) {
  const Matrix a = gaussian_matrix(n, n, rng);
  const Matrix s = a * a.transpose() / static_cast<double>(n) + floor * Matrix::Identity(n, n);
  return 0.5 * (s + s.transpose());  // bitwise symmetric
}

// Schur complement of the leading k x k block through the inverse-block identity:
// (Sigma / Sigma_11) = ((Sigma^{-1})_22)^{-1}.
inline Matrix schur_by_inverse(const Matrix& sigma, Eigen::Index k) {
  const Eigen::Index r = sigma.rows() - k;
  const Matrix inv = sigma.inverse();
  return inv.bottomRightCorner(r, r).inverse();
}

// Rows sorted lexicographically (ties by index).
inline Perm lexicographic_order(const Matrix& pts) {
  Perm order(pts.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
      if (pts(a, c) < pts(b, c)) return true;
      if (pts(a, c) > pts(b, c)) return false;
    }
    return false;
  });
  return order;
}

inline Matrix squared_distances(const Matrix& pts) {
  Matrix d(pts.rows(), pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index k = 0; k < pts.rows(); ++k) d(i, k) = (pts.row(i) - pts.row(k)).squaredNorm();
  return d;
}

inline double max_marginal_residual(const Matrix& plan, const Vector& p, const Vector& q) {
  return std::max((plan.rowwise().sum() - p).cwiseAbs().maxCoeff(),
                  (plan.colwise().sum().transpose() - q).cwiseAbs().maxCoeff());
}

inline bool nonincreasing(const std::vector<double>& trace, double slack) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] > trace[i - 1] + slack) return false;
  return true;
}

}  // namespace oracle
