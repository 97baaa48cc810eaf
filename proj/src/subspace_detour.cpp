#include "gwdetours/subspace_detour.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "gwdetours/exact_ot.hpp"
#include "gwdetours/gw_1d.hpp"
#include "gwdetours/gw_solver.hpp"

namespace gwd {

namespace {

constexpr double kSkipCellMass = 1e-15;

void check_ambient(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Subspace& e, const Subspace& f) {
  if (mu.dim() != e.ambient_dim() || nu.dim() != f.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "subspace ambient dimension does not match the measure");
  }
}

void check_bins(const SubspacePlan& sub, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (static_cast<Eigen::Index>(sub.source_bins.bin_of.size()) != mu.size() ||
      static_cast<Eigen::Index>(sub.target_bins.bin_of.size()) != nu.size() ||
      sub.plan.rows() != sub.source_bins.size() || sub.plan.cols() != sub.target_bins.size()) {
    throw Error(ErrorCode::DimensionMismatch, "subspace plan does not match the measures");
  }
}

struct BinMasses {
  Vector source, target;
};

// Conditionals are normalized by the measures' own bin masses; the plan must agree with them.
BinMasses measured_bin_masses(const SubspacePlan& sub, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  BinMasses m{bin_masses(sub.source_bins, mu.weights()), bin_masses(sub.target_bins, nu.weights())};
  const double residual = std::max((sub.plan.matrix().rowwise().sum() - m.source).cwiseAbs().maxCoeff(),
                                   (sub.plan.matrix().colwise().sum().transpose() - m.target).cwiseAbs().maxCoeff());
  if (residual > Coupling::kMarginalTolerance) {
    throw Error(ErrorCode::InfeasibleMarginals, "subspace plan marginals differ from the projected measures");
  }
  return m;
}

Matrix pick_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

Vector pick(const Vector& v, const std::vector<Eigen::Index>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(idx[r]);
  return out;
}

// Normalized conditional weights of the members of one bin.
Vector conditional_weights(const Vector& weights, const std::vector<Eigen::Index>& members, double bin_mass) {
  if (!(bin_mass > 0.0)) throw Error(ErrorCode::EmptyConditional, "subspace plan references a bin without mass");
  return pick(weights, members) / bin_mass;
}

Matrix solve_conditional(const Matrix& xs, const Vector& a, const Matrix& ys, const Vector& b,
                         OrthogonalSolver solver, const DetourOptions& options) {
  if (a.size() == 1 || b.size() == 1 || xs.cols() == 0 || ys.cols() == 0) return a * b.transpose();
  switch (solver) {
    case OrthogonalSolver::GWSquare:
      return solve_gw_cg(squared_distance_similarity(xs), squared_distance_similarity(ys), a, b, std::nullopt,
                         options.cg)
          .coupling.matrix();
    case OrthogonalSolver::InnerGW1D:
      if (xs.cols() != 1 || ys.cols() != 1) {
        throw Error(ErrorCode::DimensionMismatch, "InnerGW1D conditionals need one-dimensional complements");
      }
      return inner_gw_1d(make_discrete_measure(xs, a / a.sum()), make_discrete_measure(ys, b / b.sum()))
                 .coupling.matrix() * a.sum();
    case OrthogonalSolver::Kantorovich:
      if (xs.cols() != ys.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "Kantorovich conditionals need equal complement dimensions");
      }
      return solve_kantorovich(squared_euclidean_cost(xs, ys), a, b).coupling.matrix();
  }
  throw Error(ErrorCode::InvalidArgument, "unknown orthogonal solver");
}

}  // namespace

const char* detour_mode_name(DetourMode m) noexcept {
  return m == DetourMode::MongeIndependent ? "monge_independent" : "monge_knothe";
}

SubspacePlan subspace_optimal_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Subspace& e,
                                   const Subspace& f, SubspaceSolver solver, const DetourOptions& options) {
  check_ambient(mu, nu, e, f);
  const DiscreteMeasure pe = project_measure(mu, e);
  const DiscreteMeasure pf = project_measure(nu, f);
  Binning sb = bin_points(pe.points(), options.quantization);
  Binning tb = bin_points(pf.points(), options.quantization);
  const Vector a = bin_masses(sb, mu.weights());
  const Vector b = bin_masses(tb, nu.weights());
  const DiscreteMeasure ma = make_discrete_measure(sb.representatives, a);
  const DiscreteMeasure mb = make_discrete_measure(tb.representatives, b);
  Matrix plan;
  try {
    switch (solver) {
      case SubspaceSolver::InnerGW1D:
        if (e.dim() != 1 || f.dim() != 1) {
          throw Error(ErrorCode::DimensionMismatch, "InnerGW1D needs one-dimensional subspaces");
        }
        plan = inner_gw_1d(ma, mb).coupling.matrix();
        break;
      case SubspaceSolver::GWSquare:
        plan = solve_gw_cg(squared_distance_similarity(ma.points()), squared_distance_similarity(mb.points()),
                           ma.weights(), mb.weights(), std::nullopt, options.cg)
                   .coupling.matrix();
        break;
      case SubspaceSolver::Kantorovich:
        if (e.dim() != f.dim()) {
          throw Error(ErrorCode::DimensionMismatch, "Kantorovich needs subspaces of equal dimension");
        }
        plan = solve_kantorovich(squared_euclidean_cost(ma.points(), mb.points()), ma.weights(), mb.weights())
                   .coupling.matrix();
        break;
    }
  } catch (const Error& err) {
    if (err.code() == ErrorCode::DimensionMismatch) throw;
    throw Error(ErrorCode::SolverFailure, std::string("subspace solve failed: ") + err.what());
  }
  return {std::move(sb), std::move(tb), Coupling(std::move(plan), ma.weights(), mb.weights())};
}

DetourPlan monge_independent(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Subspace& e,
                             const Subspace& f, const SubspacePlan& sub) {
  check_ambient(mu, nu, e, f);
  check_bins(sub, mu, nu);
  const BinMasses masses = measured_bin_masses(sub, mu, nu);
  const Vector& am = masses.source;
  const Vector& bm = masses.target;
  const Matrix& g = sub.plan.matrix();
  Matrix full = Matrix::Zero(mu.size(), nu.size());
  for (Eigen::Index a = 0; a < g.rows(); ++a) {
    for (Eigen::Index b = 0; b < g.cols(); ++b) {
      const double w = g(a, b);
      if (w < kSkipCellMass) continue;
      const auto& rows = sub.source_bins.members[static_cast<std::size_t>(a)];
      const auto& cols = sub.target_bins.members[static_cast<std::size_t>(b)];
      const Vector ca = conditional_weights(mu.weights(), rows, am(a));
      const Vector cb = conditional_weights(nu.weights(), cols, bm(b));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
          full(rows[r], cols[c]) += w * ca(static_cast<Eigen::Index>(r)) * cb(static_cast<Eigen::Index>(c));
        }
      }
    }
  }
  return {sub.plan, Coupling(std::move(full), mu.weights(), nu.weights()), DetourMode::MongeIndependent, e, f};
}

DetourPlan monge_knothe(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Subspace& e,
                        const Subspace& f, const SubspacePlan& sub, OrthogonalSolver solver,
                        const DetourOptions& options) {
  check_ambient(mu, nu, e, f);
  check_bins(sub, mu, nu);
  const Matrix xs = mu.points() * e.complement();
  const Matrix ys = nu.points() * f.complement();
  const BinMasses masses = measured_bin_masses(sub, mu, nu);
  const Vector& am = masses.source;
  const Vector& bm = masses.target;
  const Matrix& g = sub.plan.matrix();

  struct Cell {
    Eigen::Index a, b;
    Matrix plan;
  };
  std::vector<Cell> cells;
  for (Eigen::Index a = 0; a < g.rows(); ++a) {
    for (Eigen::Index b = 0; b < g.cols(); ++b) {
      if (g(a, b) >= kSkipCellMass) cells.push_back({a, b, {}});
    }
  }

  auto solve_cell = [&](Cell& cell) {
    const auto& rows = sub.source_bins.members[static_cast<std::size_t>(cell.a)];
    const auto& cols = sub.target_bins.members[static_cast<std::size_t>(cell.b)];
    const Vector ca = conditional_weights(mu.weights(), rows, am(cell.a));
    const Vector cb = conditional_weights(nu.weights(), cols, bm(cell.b));
    cell.plan = g(cell.a, cell.b) * solve_conditional(pick_rows(xs, rows), ca, pick_rows(ys, cols), cb, solver, options);
  };

  const auto workers = static_cast<std::size_t>(
      std::min<std::size_t>(static_cast<std::size_t>(configured_threads()), cells.size()));
  if (workers <= 1) {
    for (Cell& cell : cells) solve_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) {
          try {
            solve_cell(cells[c]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  Matrix full = Matrix::Zero(mu.size(), nu.size());
  for (const Cell& cell : cells) {
    const auto& rows = sub.source_bins.members[static_cast<std::size_t>(cell.a)];
    const auto& cols = sub.target_bins.members[static_cast<std::size_t>(cell.b)];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        full(rows[r], cols[c]) += cell.plan(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }
  return {sub.plan, Coupling(std::move(full), mu.weights(), nu.weights()), DetourMode::MongeKnothe, e, f};
}

Matrix aggregate_by_bins(const Matrix& full_plan, const Binning& source_bins, const Binning& target_bins) {
  if (static_cast<Eigen::Index>(source_bins.bin_of.size()) != full_plan.rows() ||
      static_cast<Eigen::Index>(target_bins.bin_of.size()) != full_plan.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "binning does not match the plan");
  }
  Matrix out = Matrix::Zero(source_bins.size(), target_bins.size());
  for (Eigen::Index i = 0; i < full_plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < full_plan.cols(); ++j) {
      out(source_bins.bin_of[static_cast<std::size_t>(i)], target_bins.bin_of[static_cast<std::size_t>(j)]) +=
          full_plan(i, j);
    }
  }
  return out;
}

}  // namespace gwd
