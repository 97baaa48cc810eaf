#include "gwdetours/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gwd {

namespace {

constexpr double kDropMass = 1e-15;

// Network simplex for the transportation problem with supplies p (rows) and
// demands q (columns). Node layout: rows 0..n-1, columns n..n+m-1, root n+m.
// Real arc e < n*m goes row e/m -> column e%m. Artificial arc n*m+u joins node
// u to the root, pointing root-ward for rows and away from it for columns, so
// the all-artificial start carries positive flow everywhere (strongly feasible).
// The rooted tree and potentials are rebuilt by BFS after every pivot: O(n+m)
// per pivot, which is cheap next to pricing at the sizes this library targets.
class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, const Vector& p, const Vector& q)
      : n_(p.size()),
        m_(q.size()),
        nodes_(n_ + m_ + 1),
        root_(n_ + m_),
        real_arcs_(n_ * m_),
        cost_(static_cast<std::size_t>(real_arcs_)),
        flow_(static_cast<std::size_t>(real_arcs_ + nodes_ - 1), 0.0),
        adj_(static_cast<std::size_t>(nodes_)),
        parent_(static_cast<std::size_t>(nodes_)),
        depth_(static_cast<std::size_t>(nodes_)),
        pred_(static_cast<std::size_t>(nodes_)),
        up_(static_cast<std::size_t>(nodes_)),
        pi_(static_cast<std::size_t>(nodes_)) {
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = 0; j < m_; ++j) cost_[static_cast<std::size_t>(i * m_ + j)] = cost(i, j);
    }
    // Costs are normalized to [0, 1]; any simple path costs < nodes.
    art_cost_ = 2.0 * static_cast<double>(nodes_);
    for (Eigen::Index u = 0; u < n_ + m_; ++u) {
      const Eigen::Index e = real_arcs_ + u;
      flow_[static_cast<std::size_t>(e)] = u < n_ ? p(u) : q(u - n_);
      add_basic(e);
    }
    const double nn = static_cast<double>(nodes_);
    tolerance_ = std::max(1e-12, 4e-16 * nn * nn);
    rebuild();
  }

  void run() {
    const Eigen::Index block =
        std::max<Eigen::Index>(10, static_cast<Eigen::Index>(std::ceil(std::sqrt(double(real_arcs_)))));
    const long long max_pivots = 200LL * (real_arcs_ + nodes_) + 100000LL;
    Eigen::Index next = 0;
    for (long long pivot = 0;; ++pivot) {
      if (pivot > max_pivots) {
        throw Error(ErrorCode::NumericalFailure, "network simplex exceeded its pivot budget");
      }
      Eigen::Index best = -1;
      double best_rc = -tolerance_;
      Eigen::Index in_block = 0;
      for (Eigen::Index scanned = 0; scanned < real_arcs_; ++scanned) {
        const Eigen::Index e = next;
        next = next + 1 == real_arcs_ ? 0 : next + 1;
        const double rc = reduced_cost(e);
        if (rc < best_rc) {
          best_rc = rc;
          best = e;
        }
        if (++in_block == block) {
          if (best >= 0) break;
          in_block = 0;
        }
      }
      if (best < 0) break;
      pivot_on(best);
    }
    for (Eigen::Index u = 0; u < n_ + m_; ++u) {
      if (flow_[static_cast<std::size_t>(real_arcs_ + u)] > 1e-9) {
        throw Error(ErrorCode::NumericalFailure, "network simplex ended with artificial flow");
      }
    }
  }

  Matrix plan() const {
    Matrix out(n_, m_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = 0; j < m_; ++j) {
        out(i, j) = std::max(0.0, flow_[static_cast<std::size_t>(i * m_ + j)]);
      }
    }
    return out;
  }

  // Duals with u_i + v_j <= c_ij: u_i = -pi_i, v_j = pi_{n+j}.
  void potentials(Vector& u, Vector& v) const {
    u.resize(n_);
    v.resize(m_);
    for (Eigen::Index i = 0; i < n_; ++i) u(i) = -pi_[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m_; ++j) v(j) = pi_[static_cast<std::size_t>(n_ + j)];
    const double shift = u.mean();
    u.array() -= shift;
    v.array() += shift;
  }

 private:
  Eigen::Index source(Eigen::Index e) const {
    if (e < real_arcs_) return e / m_;
    const Eigen::Index u = e - real_arcs_;
    return u < n_ ? u : root_;
  }
  Eigen::Index target(Eigen::Index e) const {
    if (e < real_arcs_) return n_ + e % m_;
    const Eigen::Index u = e - real_arcs_;
    return u < n_ ? root_ : u;
  }
  double arc_cost(Eigen::Index e) const {
    return e < real_arcs_ ? cost_[static_cast<std::size_t>(e)] : art_cost_;
  }
  double reduced_cost(Eigen::Index e) const {
    return arc_cost(e) + pi_[static_cast<std::size_t>(source(e))] -
           pi_[static_cast<std::size_t>(target(e))];
  }

  void add_basic(Eigen::Index e) {
    adj_[static_cast<std::size_t>(source(e))].push_back(e);
    adj_[static_cast<std::size_t>(target(e))].push_back(e);
  }
  void remove_basic(Eigen::Index e) {
    for (Eigen::Index node : {source(e), target(e)}) {
      auto& list = adj_[static_cast<std::size_t>(node)];
      auto it = std::find(list.begin(), list.end(), e);
      *it = list.back();
      list.pop_back();
    }
  }

  void rebuild() {
    std::vector<Eigen::Index> queue;
    queue.reserve(static_cast<std::size_t>(nodes_));
    std::vector<char> seen(static_cast<std::size_t>(nodes_), 0);
    queue.push_back(root_);
    seen[static_cast<std::size_t>(root_)] = 1;
    parent_[static_cast<std::size_t>(root_)] = -1;
    depth_[static_cast<std::size_t>(root_)] = 0;
    pi_[static_cast<std::size_t>(root_)] = 0.0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Eigen::Index u = queue[head];
      for (Eigen::Index e : adj_[static_cast<std::size_t>(u)]) {
        const Eigen::Index s = source(e);
        const Eigen::Index w = s == u ? target(e) : s;
        const auto wi = static_cast<std::size_t>(w);
        if (seen[wi]) continue;
        seen[wi] = 1;
        parent_[wi] = u;
        pred_[wi] = e;
        depth_[wi] = depth_[static_cast<std::size_t>(u)] + 1;
        up_[wi] = s == w;  // arc leaves w towards its parent
        // zero reduced cost on tree arcs: c + pi_source - pi_target = 0
        pi_[wi] = up_[wi] ? pi_[static_cast<std::size_t>(u)] - arc_cost(e)
                          : pi_[static_cast<std::size_t>(u)] + arc_cost(e);
        queue.push_back(w);
      }
    }
    if (queue.size() != static_cast<std::size_t>(nodes_)) {
      throw Error(ErrorCode::NumericalFailure, "basis is not a spanning tree");
    }
  }

  void pivot_on(Eigen::Index in_arc) {
    const Eigen::Index first = source(in_arc);
    const Eigen::Index second = target(in_arc);
    Eigen::Index a = first, b = second;
    while (a != b) {
      if (depth_[static_cast<std::size_t>(a)] >= depth_[static_cast<std::size_t>(b)]) {
        a = parent_[static_cast<std::size_t>(a)];
      } else {
        b = parent_[static_cast<std::size_t>(b)];
      }
    }
    const Eigen::Index join = a;

    // Leaving arc: Cunningham's rule (strict on the source side, non-strict on
    // the target side) keeps the tree strongly feasible and rules out cycling.
    constexpr double inf = std::numeric_limits<double>::infinity();
    double delta = inf;
    Eigen::Index u_out = -1;
    for (Eigen::Index u = first; u != join; u = parent_[static_cast<std::size_t>(u)]) {
      const auto ui = static_cast<std::size_t>(u);
      const double d = up_[ui] ? flow_[static_cast<std::size_t>(pred_[ui])] : inf;
      if (d < delta) {
        delta = d;
        u_out = u;
      }
    }
    for (Eigen::Index u = second; u != join; u = parent_[static_cast<std::size_t>(u)]) {
      const auto ui = static_cast<std::size_t>(u);
      const double d = up_[ui] ? inf : flow_[static_cast<std::size_t>(pred_[ui])];
      if (d <= delta) {
        delta = d;
        u_out = u;
      }
    }
    if (u_out < 0 || !std::isfinite(delta)) {
      throw Error(ErrorCode::NumericalFailure, "unbounded pivot in transportation problem");
    }
    delta = std::max(delta, 0.0);

    flow_[static_cast<std::size_t>(in_arc)] += delta;
    for (Eigen::Index u = first; u != join; u = parent_[static_cast<std::size_t>(u)]) {
      const auto ui = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[ui])] += up_[ui] ? -delta : delta;
    }
    for (Eigen::Index u = second; u != join; u = parent_[static_cast<std::size_t>(u)]) {
      const auto ui = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[ui])] += up_[ui] ? delta : -delta;
    }
    const Eigen::Index out_arc = pred_[static_cast<std::size_t>(u_out)];
    flow_[static_cast<std::size_t>(out_arc)] = 0.0;
    remove_basic(out_arc);
    add_basic(in_arc);
    rebuild();
  }

  Eigen::Index n_, m_, nodes_, root_, real_arcs_;
  double art_cost_ = 0.0;
  double tolerance_ = 1e-12;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<std::vector<Eigen::Index>> adj_;
  std::vector<Eigen::Index> parent_;
  std::vector<Eigen::Index> depth_;
  std::vector<Eigen::Index> pred_;
  std::vector<char> up_;
  std::vector<double> pi_;
};

void check_marginal_vector(const Vector& v, const char* name) {
  if (!v.allFinite()) throw Error(ErrorCode::NonFiniteValue, std::string(name) + " is not finite");
  if ((v.array() < 0.0).any()) throw Error(ErrorCode::NegativeWeight, std::string(name) + " has negative mass");
}

}  // namespace

std::vector<Eigen::Index> sorted_order(const Vector& values, bool descending) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return descending ? values(a) > values(b) : values(a) < values(b);
  });
  return order;
}

Matrix north_west_corner(const Vector& p, const std::vector<Eigen::Index>& row_order,
                         const Vector& q, const std::vector<Eigen::Index>& col_order) {
  const auto n = row_order.size();
  const auto m = col_order.size();
  Matrix plan = Matrix::Zero(p.size(), q.size());
  if (n == 0 || m == 0) return plan;
  std::size_t a = 0, b = 0;
  double ra = p(row_order[0]);
  double rb = q(col_order[0]);
  while (true) {
    const double x = std::min(ra, rb);
    plan(row_order[a], col_order[b]) += x;
    ra -= x;
    rb -= x;
    const bool last_row = a + 1 == n;
    const bool last_col = b + 1 == m;
    if (last_row && last_col) break;
    if (!last_row && (ra <= rb || last_col)) {
      ra = p(row_order[++a]);
    } else {
      rb = q(col_order[++b]);
    }
  }
  return plan;
}

TransportResult solve_kantorovich(const Matrix& cost, const Vector& p, const Vector& q) {
  if (cost.rows() != p.size() || cost.cols() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cost matrix shape does not match marginals");
  }
  if (p.size() == 0 || q.size() == 0) throw Error(ErrorCode::EmptySupport, "empty marginal");
  if (!cost.allFinite()) throw Error(ErrorCode::NonFiniteValue, "cost matrix is not finite");
  check_marginal_vector(p, "row marginal");
  check_marginal_vector(q, "column marginal");
  if (std::abs(p.sum() - q.sum()) > 1e-9) {
    throw Error(ErrorCode::InfeasibleMarginals, "marginal masses differ by " +
                                                    std::to_string(std::abs(p.sum() - q.sum())));
  }

  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) >= kDropMass) rows.push_back(i);
  }
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (q(j) >= kDropMass) cols.push_back(j);
  }
  if (rows.empty() || cols.empty()) {
    throw Error(ErrorCode::InfeasibleMarginals, "no atom carries mass");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(cols.size());
  Matrix sub(n, m);
  Vector ps(n), qs(m);
  for (Eigen::Index a = 0; a < n; ++a) ps(a) = p(rows[a]);
  for (Eigen::Index b = 0; b < m; ++b) qs(b) = q(cols[b]);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = cost(rows[a], cols[b]);
  }

  const double lo = sub.minCoeff();
  const double range = sub.maxCoeff() - lo;
  Matrix sub_plan;
  Vector su, sv;
  if (!(range > 0.0)) {
    std::vector<Eigen::Index> ro(static_cast<std::size_t>(n)), co(static_cast<std::size_t>(m));
    std::iota(ro.begin(), ro.end(), Eigen::Index{0});
    std::iota(co.begin(), co.end(), Eigen::Index{0});
    sub_plan = north_west_corner(ps, ro, qs, co);
    su = Vector::Constant(n, lo);
    sv = Vector::Zero(m);
  } else {
    TransportSimplex simplex((sub.array() - lo) / range, ps, qs);
    simplex.run();
    sub_plan = simplex.plan();
    simplex.potentials(su, sv);
    su = su * range;
    sv = sv * range;
    su.array() += lo;
  }

  Matrix plan = Matrix::Zero(p.size(), q.size());
  Vector u = Vector::Zero(p.size());
  Vector v = Vector::Zero(q.size());
  for (Eigen::Index a = 0; a < n; ++a) {
    u(rows[a]) = su(a);
    for (Eigen::Index b = 0; b < m; ++b) plan(rows[a], cols[b]) = sub_plan(a, b);
  }
  for (Eigen::Index b = 0; b < m; ++b) v(cols[b]) = sv(b);
  // Dropped atoms get the tightest feasible potential.
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) < kDropMass) u(i) = (cost.row(i).transpose() - v).minCoeff();
  }
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (q(j) < kDropMass) v(j) = (cost.col(j) - u).minCoeff();
  }

  const double value = (cost.array() * plan.array()).sum();
  Coupling coupling(std::move(plan), p, q);
  return {std::move(coupling), value, std::move(u), std::move(v)};
}

Coupling wasserstein_1d_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "1D coupling needs one-dimensional measures");
  }
  const Vector x = mu.points().col(0);
  const Vector y = nu.points().col(0);
  Matrix plan = north_west_corner(mu.weights(), sorted_order(x), nu.weights(), sorted_order(y));
  return Coupling(std::move(plan), mu.weights(), nu.weights());
}

Matrix squared_euclidean_cost(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "point sets have different dimensions");
  }
  const Vector xn = x.rowwise().squaredNorm();
  const Vector yn = y.rowwise().squaredNorm();
  Matrix c = (-2.0 * x * y.transpose()).eval();
  c.colwise() += xn;
  c.rowwise() += yn.transpose();
  return c.cwiseMax(0.0);
}

}  // namespace gwd
