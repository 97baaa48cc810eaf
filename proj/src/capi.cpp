#include "gwdetours/gwdetours.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "gwdetours/exact_ot.hpp"
#include "gwdetours/experiments.hpp"
#include "gwdetours/gw_1d.hpp"
#include "gwdetours/gw_solver.hpp"
#include "gwdetours/hadamard.hpp"
#include "gwdetours/io.hpp"
#include "gwdetours/kr.hpp"
#include "gwdetours/spectral_mesh.hpp"
#include "gwdetours/subspace_detour.hpp"

struct gwd_measure {
  gwd::DiscreteMeasure value;
};

struct gwd_coupling {
  gwd::Coupling value;
};

struct gwd_mesh {
  gwd::Mesh value;
};

namespace {

thread_local std::string last_error;

gwd_status fail(gwd_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs body, translating exceptions into status codes.
template <typename F>
gwd_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return GWD_OK;
  } catch (const gwd::Error& e) {
    return fail(static_cast<gwd_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GWD_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(GWD_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(GWD_INTERNAL_ERROR, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw gwd::Error(gwd::ErrorCode::InvalidArgument, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

gwd::Matrix row_major(const double* data, size_t rows, size_t cols) {
  gwd::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i * cols + j];
  }
  return m;
}

gwd::Vector vec(const double* data, size_t n) {
  return Eigen::Map<const gwd::Vector>(data, static_cast<Eigen::Index>(n));
}

gwd::CGOptions cg_options(const gwd_cg_options* opts) {
  gwd::CGOptions o;
  if (opts) {
    o.max_iter = opts->max_iter;
    o.tol = opts->tol;
  }
  return o;
}

gwd_coupling* wrap(gwd::Coupling c) { return new gwd_coupling{std::move(c)}; }

void fill(gwd_cg_result* result, const gwd::CGReport& report) {
  if (!result) return;
  result->energy = report.energy_trace.back();
  result->iterations = report.iterations;
  result->converged = report.converged ? 1 : 0;
}

gwd::SubspaceSolver subspace_solver(gwd_subspace_solver s) {
  switch (s) {
    case GWD_SUBSPACE_INNER_GW_1D: return gwd::SubspaceSolver::InnerGW1D;
    case GWD_SUBSPACE_GW_SQUARE: return gwd::SubspaceSolver::GWSquare;
    case GWD_SUBSPACE_KANTOROVICH: return gwd::SubspaceSolver::Kantorovich;
  }
  throw gwd::Error(gwd::ErrorCode::InvalidArgument, "unknown subspace solver");
}

gwd::OrthogonalSolver orthogonal_solver(gwd_subspace_solver s) {
  switch (s) {
    case GWD_SUBSPACE_INNER_GW_1D: return gwd::OrthogonalSolver::InnerGW1D;
    case GWD_SUBSPACE_GW_SQUARE: return gwd::OrthogonalSolver::GWSquare;
    case GWD_SUBSPACE_KANTOROVICH: return gwd::OrthogonalSolver::Kantorovich;
  }
  throw gwd::Error(gwd::ErrorCode::InvalidArgument, "unknown orthogonal solver");
}

gwd::RegistrationOptions registration_options(gwd_register_method method, gwd_edge_weighting weighting) {
  gwd::RegistrationOptions o;
  switch (method) {
    case GWD_REGISTER_FIEDLER: o.method = gwd::RegistrationMethod::Fiedler; break;
    case GWD_REGISTER_GW_ADJACENCY: o.method = gwd::RegistrationMethod::GWAdjacency; break;
    default: throw gwd::Error(gwd::ErrorCode::InvalidArgument, "unknown registration method");
  }
  switch (weighting) {
    case GWD_WEIGHT_UNIT: o.weighting = gwd::EdgeWeighting::Unit; break;
    case GWD_WEIGHT_INVERSE_DISTANCE: o.weighting = gwd::EdgeWeighting::InverseDistance; break;
    case GWD_WEIGHT_DISTANCE: o.weighting = gwd::EdgeWeighting::Distance; break;
    default: throw gwd::Error(gwd::ErrorCode::InvalidArgument, "unknown edge weighting");
  }
  return o;
}

gwd_experiment_options defaults_or(const gwd_experiment_options* opts) {
  gwd_experiment_options o;
  gwd_experiment_options_init(&o);
  return opts ? *opts : o;
}

}  // namespace

extern "C" {

const char* gwd_status_name(gwd_status status) {
  if (status == GWD_OK) return "OK";
  if (status == GWD_INTERNAL_ERROR) return "InternalError";
  const int code = static_cast<int>(status);
  if (code >= 1 && code <= 20) return gwd::error_code_name(static_cast<gwd::ErrorCode>(code));
  return "Unknown";
}

const char* gwd_last_error(void) { return last_error.c_str(); }

void gwd_string_free(char* s) { std::free(s); }

gwd_status gwd_measure_create(const double* points, size_t n, size_t d, const double* weights, gwd_measure** out) {
  return guarded([&] {
    require(out != nullptr && (points != nullptr || n * d == 0), "null argument");
    gwd::Matrix pts = row_major(points, n, d);
    *out = new gwd_measure{weights ? gwd::make_discrete_measure(std::move(pts), vec(weights, n))
                                   : gwd::make_uniform_measure(std::move(pts))};
  });
}

gwd_status gwd_measure_load_csv(const char* path, gwd_measure** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new gwd_measure{gwd::io::read_points_csv(path)};
  });
}

size_t gwd_measure_size(const gwd_measure* mu) { return mu ? static_cast<size_t>(mu->value.size()) : 0; }
size_t gwd_measure_dim(const gwd_measure* mu) { return mu ? static_cast<size_t>(mu->value.dim()) : 0; }
void gwd_measure_free(gwd_measure* mu) { delete mu; }

size_t gwd_coupling_rows(const gwd_coupling* c) { return c ? static_cast<size_t>(c->value.rows()) : 0; }
size_t gwd_coupling_cols(const gwd_coupling* c) { return c ? static_cast<size_t>(c->value.cols()) : 0; }

gwd_status gwd_coupling_copy(const gwd_coupling* c, double* out) {
  return guarded([&] {
    require(c && out, "null argument");
    const gwd::Matrix& m = c->value.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
    }
  });
}

double gwd_coupling_marginal_residual(const gwd_coupling* c) {
  return c ? c->value.marginal_residual() : std::numeric_limits<double>::quiet_NaN();
}

gwd_status gwd_coupling_write_csv(const gwd_coupling* c, const char* path) {
  return guarded([&] {
    require(c && path, "null argument");
    gwd::io::write_coupling_csv(path, c->value.matrix());
  });
}

void gwd_coupling_free(gwd_coupling* c) { delete c; }

void gwd_cg_options_init(gwd_cg_options* opts) {
  if (!opts) return;
  opts->max_iter = 1000;
  opts->tol = 1e-9;
}

gwd_status gwd_solve_kantorovich(const double* cost, size_t n, size_t m, const double* p, const double* q,
                                 gwd_coupling** out, double* value) {
  return guarded([&] {
    require(cost && p && q && out, "null argument");
    gwd::TransportResult r = gwd::solve_kantorovich(row_major(cost, n, m), vec(p, n), vec(q, m));
    if (value) *value = r.value;
    *out = wrap(std::move(r.coupling));
  });
}

gwd_status gwd_inner_gw_1d(const gwd_measure* mu, const gwd_measure* nu, gwd_coupling** out, int* descending,
                           double* cost) {
  return guarded([&] {
    require(mu && nu && out, "null argument");
    gwd::MonotoneChoice r = gwd::inner_gw_1d(mu->value, nu->value);
    if (descending) *descending = r.direction == gwd::Direction::Descending ? 1 : 0;
    if (cost) *cost = r.cost;
    *out = wrap(std::move(r.coupling));
  });
}

gwd_status gwd_solve_gw(const gwd_measure* mu, const gwd_measure* nu, gwd_loss loss, const gwd_cg_options* opts,
                        gwd_coupling** out, gwd_cg_result* result) {
  return guarded([&] {
    require(mu && nu && out, "null argument");
    auto sim = [loss](const gwd::Matrix& pts) {
      if (loss == GWD_LOSS_SQUARED_DISTANCE) return gwd::squared_distance_similarity(pts);
      if (loss == GWD_LOSS_INNER_PRODUCT) return gwd::inner_product_similarity(pts);
      throw gwd::Error(gwd::ErrorCode::InvalidArgument, "unknown loss");
    };
    gwd::CGReport r = gwd::solve_gw_cg(sim(mu->value.points()), sim(nu->value.points()), mu->value.weights(),
                                       nu->value.weights(), std::nullopt, cg_options(opts));
    fill(result, r);
    *out = wrap(std::move(r.coupling));
  });
}

gwd_status gwd_solve_hw(const gwd_measure* mu, const gwd_measure* nu, const double* lambda_weights,
                        const gwd_cg_options* opts, gwd_coupling** out, gwd_cg_result* result) {
  return guarded([&] {
    require(mu && nu && out, "null argument");
    const auto d = static_cast<size_t>(mu->value.dim());
    const gwd::Vector w = lambda_weights ? vec(lambda_weights, d) : gwd::Vector::Ones(mu->value.dim());
    const gwd::HWInstance inst(mu->value.points(), nu->value.points(), mu->value.weights(), nu->value.weights(), w);
    gwd::CGReport r = gwd::solve_hw(inst, std::nullopt, cg_options(opts));
    fill(result, r);
    *out = wrap(std::move(r.coupling));
  });
}

gwd_status gwd_knothe_rosenblatt(const gwd_measure* mu, const gwd_measure* nu, int alternate, double quantization,
                                 gwd_coupling** out) {
  return guarded([&] {
    require(mu && nu && out, "null argument");
    gwd::TriangularCoupling r = alternate ? gwd::alternate_kr(mu->value, nu->value, quantization)
                                          : gwd::classical_kr(mu->value, nu->value, quantization);
    *out = wrap(std::move(r.coupling));
  });
}

void gwd_detour_options_init(gwd_detour_options* opts) {
  if (!opts) return;
  opts->e_span = nullptr;
  opts->k = 1;
  opts->f_span = nullptr;
  opts->k_prime = 1;
  opts->subspace_solver = GWD_SUBSPACE_INNER_GW_1D;
  opts->mode = GWD_MONGE_KNOTHE;
  opts->orthogonal_solver = GWD_SUBSPACE_GW_SQUARE;
  opts->quantization = 0.0;
  gwd_cg_options_init(&opts->cg);
}

gwd_status gwd_subspace_detour(const gwd_measure* mu, const gwd_measure* nu, const gwd_detour_options* opts,
                               gwd_coupling** out) {
  return guarded([&] {
    require(mu && nu && opts && out, "null argument");
    auto subspace = [](const gwd::DiscreteMeasure& m, const double* span, size_t k) {
      if (!span) return gwd::pca_subspace(m, static_cast<Eigen::Index>(k));
      return gwd::Subspace::from_spanning(row_major(span, static_cast<size_t>(m.dim()), k));
    };
    const gwd::Subspace e = subspace(mu->value, opts->e_span, opts->k);
    const gwd::Subspace f = subspace(nu->value, opts->f_span, opts->k_prime);
    gwd::DetourOptions d;
    d.quantization = opts->quantization;
    d.cg = cg_options(&opts->cg);
    const gwd::SubspacePlan sub =
        gwd::subspace_optimal_plan(mu->value, nu->value, e, f, subspace_solver(opts->subspace_solver), d);
    gwd::DetourPlan plan =
        opts->mode == GWD_MONGE_INDEPENDENT
            ? gwd::monge_independent(mu->value, nu->value, e, f, sub)
            : gwd::monge_knothe(mu->value, nu->value, e, f, sub, orthogonal_solver(opts->orthogonal_solver), d);
    *out = wrap(std::move(plan.full_plan));
  });
}

gwd_status gwd_mesh_load(const char* path, gwd_mesh** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new gwd_mesh{gwd::load_mesh(path)};
  });
}

size_t gwd_mesh_vertex_count(const gwd_mesh* mesh) { return mesh ? static_cast<size_t>(mesh->value.size()) : 0; }
size_t gwd_mesh_edge_count(const gwd_mesh* mesh) { return mesh ? mesh->value.edges().size() : 0; }
void gwd_mesh_free(gwd_mesh* mesh) { delete mesh; }

gwd_status gwd_register_meshes(const gwd_mesh* src, const gwd_mesh* dst, gwd_register_method method,
                               gwd_edge_weighting weighting, const int64_t* ground_truth, size_t ground_truth_len,
                               int64_t* mapping, double* accuracy) {
  return guarded([&] {
    require(src && dst && mapping, "null argument");
    std::optional<std::vector<Eigen::Index>> gt;
    if (ground_truth) gt.emplace(ground_truth, ground_truth + ground_truth_len);
    const gwd::Assignment a = gwd::register_meshes(src->value, dst->value, gt, registration_options(method, weighting));
    for (size_t i = 0; i < a.mapping.size(); ++i) mapping[i] = a.mapping[i];
    if (accuracy) *accuracy = a.accuracy ? *a.accuracy : std::numeric_limits<double>::quiet_NaN();
  });
}

void gwd_experiment_options_init(gwd_experiment_options* opts) {
  if (!opts) return;
  opts->seed = 0;
  opts->n_points = 0;
  opts->noise = 0.05;
  opts->quantization = 0.0;
  opts->t_schedule = nullptr;
  opts->t_count = 0;
  gwd_cg_options_init(&opts->cg);
  opts->method = GWD_REGISTER_FIEDLER;
  opts->weighting = GWD_WEIGHT_UNIT;
}

gwd_status gwd_run_moons(const gwd_experiment_options* opts, const char* out_dir, char** summary_json) {
  return guarded([&] {
    require(out_dir != nullptr, "null output directory");
    const gwd_experiment_options o = defaults_or(opts);
    gwd::experiments::MoonsConfig c;
    c.seed = o.seed;
    if (o.n_points > 0) c.n_points = o.n_points;
    c.noise = o.noise;
    c.quantization = o.quantization;
    c.cg = cg_options(&o.cg);
    const std::string text = gwd::experiments::write_moons(gwd::experiments::run_moons(c), c, out_dir);
    if (summary_json) *summary_json = copy_string(text);
  });
}

gwd_status gwd_run_hw_degeneration(const gwd_experiment_options* opts, const char* out_dir, char** summary_json) {
  return guarded([&] {
    require(out_dir != nullptr, "null output directory");
    const gwd_experiment_options o = defaults_or(opts);
    gwd::experiments::HWDegenerationConfig c;
    c.seed = o.seed;
    if (o.n_points > 0) c.n_points = o.n_points;
    if (o.t_schedule) c.t_schedule.assign(o.t_schedule, o.t_schedule + o.t_count);
    c.quantization = o.quantization;
    c.cg = cg_options(&o.cg);
    const std::string text =
        gwd::experiments::write_hw_degeneration(gwd::experiments::run_hw_degeneration(c), c, out_dir);
    if (summary_json) *summary_json = copy_string(text);
  });
}

gwd_status gwd_run_register(const char* src_path, const char* dst_path, const char* gt_path,
                            const gwd_experiment_options* opts, const char* out_dir, char** summary_json) {
  return guarded([&] {
    require(src_path && dst_path && out_dir, "null argument");
    const gwd_experiment_options o = defaults_or(opts);
    gwd::experiments::RegisterConfig c;
    c.options = registration_options(o.method, o.weighting);
    c.options.cg = cg_options(&o.cg);
    const gwd::Mesh src = gwd::load_mesh(src_path);
    const gwd::Mesh dst = gwd::load_mesh(dst_path);
    std::optional<std::vector<Eigen::Index>> gt;
    if (gt_path) {
      const auto raw = gwd::io::read_index_list(gt_path);
      gt.emplace(raw.begin(), raw.end());
    }
    const gwd::Assignment a = gwd::register_meshes(src, dst, gt, c.options);
    const std::string text = gwd::experiments::write_registration(a, src, dst, c, out_dir);
    if (summary_json) *summary_json = copy_string(text);
  });
}

gwd_status gwd_make_mesh_fixture(uint64_t seed, const char* out_dir) {
  return guarded([&] {
    require(out_dir != nullptr, "null output directory");
    gwd::experiments::write_mesh_fixture(gwd::experiments::make_mesh_fixture(seed), out_dir);
  });
}

gwd_status gwd_gauss_report(const char* json, char** report_json) {
  return guarded([&] {
    require(json && report_json, "null argument");
    *report_json = copy_string(gwd::experiments::gauss_report(json));
  });
}

}  // extern "C"
