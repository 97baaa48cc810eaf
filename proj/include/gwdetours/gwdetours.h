/* C interface to the gwdetours library. All objects are opaque handles owned
 * by the caller and released with the matching *_free function. Every call
 * that can fail returns a gwd_status; on failure gwd_last_error() describes
 * the problem for the calling thread. Matrices are passed row-major. */
#ifndef GWDETOURS_H
#define GWDETOURS_H

#include <stddef.h>
#include <stdint.h>

#if defined(GWD_BUILDING_LIBRARY)
#define GWD_API __attribute__((visibility("default")))
#else
#define GWD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gwd_status {
  GWD_OK = 0,
  GWD_INVALID_ARGUMENT = 1,
  GWD_DIMENSION_MISMATCH = 2,
  GWD_NEGATIVE_WEIGHT = 3,
  GWD_EMPTY_SUPPORT = 4,
  GWD_NON_FINITE_VALUE = 5,
  GWD_WEIGHT_SUM_OUT_OF_TOLERANCE = 6,
  GWD_INFEASIBLE_MARGINALS = 7,
  GWD_NUMERICAL_FAILURE = 8,
  GWD_NON_FINITE_ENERGY = 9,
  GWD_SINGULAR_BLOCK = 10,
  GWD_DEGENERATE_COVARIANCE = 11,
  GWD_NOT_CENTERED = 12,
  GWD_EMPTY_CONDITIONAL = 13,
  GWD_SOLVER_FAILURE = 14,
  GWD_PARSE_ERROR = 15,
  GWD_DISCONNECTED_GRAPH = 16,
  GWD_INDEX_OUT_OF_RANGE = 17,
  GWD_CONVERGENCE_FAILURE = 18,
  GWD_SIZE_MISMATCH = 19,
  GWD_IO_ERROR = 20,
  GWD_INTERNAL_ERROR = 99
} gwd_status;

/* Symbolic name of a status, e.g. "InfeasibleMarginals". */
GWD_API const char* gwd_status_name(gwd_status status);

/* Message of the last failed call on this thread; "" if none. */
GWD_API const char* gwd_last_error(void);

/* Strings returned through char** out-parameters. */
GWD_API void gwd_string_free(char* s);

/* ---- measures ---------------------------------------------------------- */

typedef struct gwd_measure gwd_measure;

/* n points in R^d (row-major n x d); weights may be NULL for uniform. */
GWD_API gwd_status gwd_measure_create(const double* points, size_t n, size_t d, const double* weights,
                                      gwd_measure** out);
/* CSV with optional header x0,...,x{d-1}[,w]. */
GWD_API gwd_status gwd_measure_load_csv(const char* path, gwd_measure** out);
GWD_API size_t gwd_measure_size(const gwd_measure* mu);
GWD_API size_t gwd_measure_dim(const gwd_measure* mu);
GWD_API void gwd_measure_free(gwd_measure* mu);

/* ---- couplings --------------------------------------------------------- */

typedef struct gwd_coupling gwd_coupling;

GWD_API size_t gwd_coupling_rows(const gwd_coupling* c);
GWD_API size_t gwd_coupling_cols(const gwd_coupling* c);
/* Copies the plan into out (row-major, rows x cols). */
GWD_API gwd_status gwd_coupling_copy(const gwd_coupling* c, double* out);
GWD_API double gwd_coupling_marginal_residual(const gwd_coupling* c);
/* Writes src_index,dst_index,mass for every positive cell. */
GWD_API gwd_status gwd_coupling_write_csv(const gwd_coupling* c, const char* path);
GWD_API void gwd_coupling_free(gwd_coupling* c);

/* ---- solvers ----------------------------------------------------------- */

typedef struct gwd_cg_options {
  int max_iter; /* default 1000 */
  double tol;   /* relative energy decrease; default 1e-9 */
} gwd_cg_options;

GWD_API void gwd_cg_options_init(gwd_cg_options* opts);

typedef struct gwd_cg_result {
  double energy;
  int iterations;
  int converged;
} gwd_cg_result;

/* Exact min <C, P> over couplings of p and q; C is row-major n x m. */
GWD_API gwd_status gwd_solve_kantorovich(const double* cost, size_t n, size_t m, const double* p, const double* q,
                                         gwd_coupling** out, double* value);

/* 1D inner-product GW; *descending receives 1 if the decreasing rearrangement wins. */
GWD_API gwd_status gwd_inner_gw_1d(const gwd_measure* mu, const gwd_measure* nu, gwd_coupling** out,
                                   int* descending, double* cost);

typedef enum gwd_loss { GWD_LOSS_SQUARED_DISTANCE = 0, GWD_LOSS_INNER_PRODUCT = 1 } gwd_loss;

/* Square-loss GW by conditional gradient from the product coupling. opts may be NULL. */
GWD_API gwd_status gwd_solve_gw(const gwd_measure* mu, const gwd_measure* nu, gwd_loss loss,
                                const gwd_cg_options* opts, gwd_coupling** out, gwd_cg_result* result);

/* Hadamard-Wasserstein with coordinate weights (NULL: all ones; entry 0 must be 1). */
GWD_API gwd_status gwd_solve_hw(const gwd_measure* mu, const gwd_measure* nu, const double* lambda_weights,
                                const gwd_cg_options* opts, gwd_coupling** out, gwd_cg_result* result);

/* Knothe-Rosenblatt coupling; alternate != 0 picks inner-GW directions per slice. */
GWD_API gwd_status gwd_knothe_rosenblatt(const gwd_measure* mu, const gwd_measure* nu, int alternate,
                                         double quantization, gwd_coupling** out);

typedef enum gwd_subspace_solver {
  GWD_SUBSPACE_INNER_GW_1D = 0,
  GWD_SUBSPACE_GW_SQUARE = 1,
  GWD_SUBSPACE_KANTOROVICH = 2
} gwd_subspace_solver;

typedef enum gwd_detour_mode { GWD_MONGE_INDEPENDENT = 0, GWD_MONGE_KNOTHE = 1 } gwd_detour_mode;

typedef struct gwd_detour_options {
  const double* e_span; /* d x k row-major spanning vectors of E; NULL: first k principal axes of mu */
  size_t k;
  const double* f_span; /* analogous for F and nu */
  size_t k_prime;
  gwd_subspace_solver subspace_solver;
  gwd_detour_mode mode;
  gwd_subspace_solver orthogonal_solver; /* Monge-Knothe conditionals */
  double quantization;
  gwd_cg_options cg;
} gwd_detour_options;

GWD_API void gwd_detour_options_init(gwd_detour_options* opts);

/* Full-space subspace-detour coupling. */
GWD_API gwd_status gwd_subspace_detour(const gwd_measure* mu, const gwd_measure* nu, const gwd_detour_options* opts,
                                       gwd_coupling** out);

/* ---- meshes ------------------------------------------------------------ */

typedef struct gwd_mesh gwd_mesh;

/* OFF or ASCII PLY, chosen by extension. */
GWD_API gwd_status gwd_mesh_load(const char* path, gwd_mesh** out);
GWD_API size_t gwd_mesh_vertex_count(const gwd_mesh* mesh);
GWD_API size_t gwd_mesh_edge_count(const gwd_mesh* mesh);
GWD_API void gwd_mesh_free(gwd_mesh* mesh);

typedef enum gwd_register_method { GWD_REGISTER_FIEDLER = 0, GWD_REGISTER_GW_ADJACENCY = 1 } gwd_register_method;
typedef enum gwd_edge_weighting {
  GWD_WEIGHT_UNIT = 0,
  GWD_WEIGHT_INVERSE_DISTANCE = 1,
  GWD_WEIGHT_DISTANCE = 2
} gwd_edge_weighting;

/* Writes one target index per source vertex into mapping (length = source
 * vertex count). ground_truth may be NULL; otherwise *accuracy is set. */
GWD_API gwd_status gwd_register_meshes(const gwd_mesh* src, const gwd_mesh* dst, gwd_register_method method,
                                       gwd_edge_weighting weighting, const int64_t* ground_truth,
                                       size_t ground_truth_len, int64_t* mapping, double* accuracy);

/* ---- experiments ------------------------------------------------------- */

typedef struct gwd_experiment_options {
  uint64_t seed;             /* default 0 */
  int64_t n_points;          /* 0: experiment default (100 moons, 30 Gaussians) */
  double noise;              /* moons noise; default 0.05 */
  double quantization;       /* default 0 */
  const double* t_schedule;  /* NULL: {1, 0.1, 0.01, 0.001} */
  size_t t_count;
  gwd_cg_options cg;
  gwd_register_method method;
  gwd_edge_weighting weighting;
} gwd_experiment_options;

GWD_API void gwd_experiment_options_init(gwd_experiment_options* opts);

/* Each runner writes its artifacts under out_dir and returns the summary JSON. */
GWD_API gwd_status gwd_run_moons(const gwd_experiment_options* opts, const char* out_dir, char** summary_json);
GWD_API gwd_status gwd_run_hw_degeneration(const gwd_experiment_options* opts, const char* out_dir,
                                           char** summary_json);
/* gt_path may be NULL: one target index per line. */
GWD_API gwd_status gwd_run_register(const char* src_path, const char* dst_path, const char* gt_path,
                                    const gwd_experiment_options* opts, const char* out_dir, char** summary_json);
/* Writes source.off, target.off, ground_truth.txt for a synthetic registration check. */
GWD_API gwd_status gwd_make_mesh_fixture(uint64_t seed, const char* out_dir);
/* Gaussian closed forms for a JSON description; returns a JSON report. */
GWD_API gwd_status gwd_gauss_report(const char* json, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* GWDETOURS_H */
