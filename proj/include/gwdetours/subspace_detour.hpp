#pragma once

#include "gwdetours/binning.hpp"
#include "gwdetours/conditional_gradient.hpp"
#include "gwdetours/measures.hpp"

namespace gwd {

/// Solver for the coupling between the projected measures.
enum class SubspaceSolver { InnerGW1D, GWSquare, Kantorovich };

/// Solver for the conditional couplings glued in by the Monge-Knothe plan.
enum class OrthogonalSolver { GWSquare, InnerGW1D, Kantorovich };

enum class DetourMode { MongeIndependent, MongeKnothe };

const char* detour_mode_name(DetourMode m) noexcept;

struct DetourOptions {
  double quantization = 0.0;  // bin width for projected coordinates; 0 groups exact values
  CGOptions cg;               // used by the GWSquare solvers
};

/// Optimal plan between the projections of mu on E and nu on F. Points with
/// equal (or equally quantized) projected coordinates share a bin; `plan` is a
/// coupling between the bin measures.
struct SubspacePlan {
  Binning source_bins;
  Binning target_bins;
  Coupling plan;
};

SubspacePlan subspace_optimal_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Subspace& e,
                                   const Subspace& f, SubspaceSolver solver, const DetourOptions& options = {});

/// Full-space coupling whose bin aggregation equals the subspace plan.
struct DetourPlan {
  Coupling subspace_plan;
  Coupling full_plan;
  DetourMode mode;
  Subspace e;
  Subspace f;
};

/// Glues each subspace cell (a, b) with the independent product of the
/// conditionals of mu on bin a and nu on bin b.
DetourPlan monge_independent(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Subspace& e,
                             const Subspace& f, const SubspacePlan& sub);

/// Glues each subspace cell with an optimal coupling between the conditionals'
/// complement coordinates. Cells are solved independently, on up to
/// configured_threads() workers, and merged in cell order.
DetourPlan monge_knothe(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Subspace& e,
                        const Subspace& f, const SubspacePlan& sub, OrthogonalSolver solver,
                        const DetourOptions& options = {});

/// Sums a full-space plan over (source bin, target bin) cells.
Matrix aggregate_by_bins(const Matrix& full_plan, const Binning& source_bins, const Binning& target_bins);

}  // namespace gwd
