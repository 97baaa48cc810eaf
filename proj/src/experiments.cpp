#include "gwdetours/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "gwdetours/exact_ot.hpp"
#include "gwdetours/gaussian_closed_forms.hpp"
#include "gwdetours/gw_1d.hpp"
#include "gwdetours/gw_solver.hpp"
#include "gwdetours/hadamard.hpp"
#include "gwdetours/io.hpp"
#include "gwdetours/subspace_detour.hpp"

namespace gwd::experiments {

namespace {

using nlohmann::ordered_json;

void ensure_dir(const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::IOError, "cannot create " + out.string() + ": " + ec.message());
}

// Numbers are emitted through format_double so JSON and CSV agree digit for digit.
ordered_json number(double v) {
  return std::isfinite(v) ? ordered_json::parse(io::format_double(v)) : ordered_json(nullptr);
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

Vector vector_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix rows_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, std::string(what) + " must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw Error(ErrorCode::ParseError, std::string(what) + " is ragged");
    m.row(static_cast<Eigen::Index>(r)) = vector_from_json(j[r], what).transpose();
  }
  return m;
}

GaussianMeasure gaussian_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_object() || !j.contains("mean") || !j.contains("covariance")) {
    throw Error(ErrorCode::ParseError, std::string(what) + " needs mean and covariance");
  }
  Vector mean = vector_from_json(j["mean"], "mean");
  Matrix cov = rows_from_json(j["covariance"], "covariance");
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": covariance does not match mean");
  }
  return GaussianMeasure(std::move(mean), std::move(cov));
}

Subspace subspace_from_json(const nlohmann::json& doc, const char* key, Eigen::Index ambient, Eigen::Index k) {
  if (doc.contains(key)) {
    const Matrix rows = rows_from_json(doc[key], key);
    if (rows.cols() != ambient) throw Error(ErrorCode::DimensionMismatch, std::string(key) + " vectors have the wrong length");
    return Subspace::from_spanning(rows.transpose());
  }
  return Subspace::coordinate_axes(ambient, k);
}

double min_eigenvalue(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

Matrix make_moon(Eigen::Index n, double noise, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "moon needs at least one point");
  if (!(noise >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise must be >= 0");
  Matrix pts(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double theta = n == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1);
    pts(i, 0) = std::cos(theta);
    pts(i, 1) = std::sin(theta);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    pts(i, 0) += noise * rng.normal();
    pts(i, 1) += noise * rng.normal();
  }
  return pts;
}

Matrix quarter_turn(const Matrix& points) {
  if (points.cols() != 2) throw Error(ErrorCode::DimensionMismatch, "quarter turn needs 2D points");
  Matrix out(points.rows(), 2);
  out.col(0) = -points.col(1);
  out.col(1) = points.col(0);
  return out;
}

double identity_accuracy(const Matrix& plan) {
  const auto mapping = argmax_mapping(plan);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < mapping.size(); ++i) hits += mapping[i] == static_cast<Eigen::Index>(i);
  return mapping.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(mapping.size());
}

MoonsResult run_moons(const MoonsConfig& config) {
  Rng rng(config.seed);
  MoonsResult r;
  r.source = make_moon(config.n_points, config.noise, rng);
  r.target = quarter_turn(r.source);
  const DiscreteMeasure mu = make_uniform_measure(r.source);
  const DiscreteMeasure nu = make_uniform_measure(r.target);

  const SimilarityMatrix cx = squared_distance_similarity(r.source);
  const SimilarityMatrix cy = squared_distance_similarity(r.target);
  const CGReport gw = solve_gw_cg(cx, cy, mu.weights(), nu.weights(), std::nullopt, config.cg);
  r.gw_plan = gw.coupling.matrix();
  r.gw_energy = gw.energy_trace.back();
  r.gw_iterations = gw.iterations;
  r.gw_converged = gw.converged;
  r.gw_accuracy = identity_accuracy(r.gw_plan);

  DetourOptions opt;
  opt.quantization = config.quantization;
  opt.cg = config.cg;
  auto detour = [&](const Subspace& e, const Subspace& f) {
    const SubspacePlan sub = subspace_optimal_plan(mu, nu, e, f, SubspaceSolver::InnerGW1D, opt);
    return monge_knothe(mu, nu, e, f, sub, OrthogonalSolver::InnerGW1D, opt).full_plan.matrix();
  };
  const Subspace axis = Subspace::coordinate_axes(2, 1);
  r.axis_plan = detour(axis, axis);
  r.axis_accuracy = identity_accuracy(r.axis_plan);
  r.pca_plan = detour(pca_subspace(mu, 1), pca_subspace(nu, 1));
  r.pca_accuracy = identity_accuracy(r.pca_plan);
  return r;
}

std::string write_moons(const MoonsResult& r, const MoonsConfig& config, const std::filesystem::path& out) {
  ensure_dir(out);
  io::write_points_csv(out / "source.csv", make_uniform_measure(r.source));
  io::write_points_csv(out / "target.csv", make_uniform_measure(r.target));
  io::write_coupling_csv(out / "coupling_gw.csv", r.gw_plan);
  io::write_coupling_csv(out / "coupling_detour_axis.csv", r.axis_plan);
  io::write_coupling_csv(out / "coupling_detour_pca.csv", r.pca_plan);
  ordered_json j;
  j["experiment"] = "moons";
  j["seed"] = config.seed;
  j["n_points"] = config.n_points;
  j["noise"] = number(config.noise);
  j["quantization"] = number(config.quantization);
  j["gw"] = {{"accuracy", number(r.gw_accuracy)},
             {"energy", number(r.gw_energy)},
             {"iterations", r.gw_iterations},
             {"converged", r.gw_converged}};
  j["detour_shared_axis"] = {{"accuracy", number(r.axis_accuracy)}};
  j["detour_pca"] = {{"accuracy", number(r.pca_accuracy)}};
  const std::string text = dump(j);
  io::write_text(out / "summary.json", text);
  return text;
}

std::pair<Matrix, Matrix> hw_fixture(std::uint64_t seed, Eigen::Index n) {
  Rng rng(seed);
  const GaussianMeasure a(Vector{{3.0, 1.0}}, Matrix{{1.0, 0.3}, {0.3, 0.5}});
  const GaussianMeasure b(Vector{{-3.0, 0.5}}, Matrix{{1.5, -0.4}, {-0.4, 0.6}});
  Matrix x = sample_gaussian(a, n, rng);
  Matrix y = sample_gaussian(b, n, rng);
  return {std::move(x), std::move(y)};
}

HWDegenerationResult run_hw_degeneration(const HWDegenerationConfig& config) {
  auto [x, y] = hw_fixture(config.seed, config.n_points);
  const DiscreteMeasure mu = make_uniform_measure(x);
  const DiscreteMeasure nu = make_uniform_measure(y);
  const HWInstance base(x, y, mu.weights(), nu.weights());
  HWDegenerationResult r{x, y, hw_t_schedule(base, config.t_schedule, config.cg), alternate_kr(mu, nu, config.quantization),
                         {}, Direction::Ascending, false};
  for (const CGReport& rep : r.reports) {
    r.tv_to_alternate.push_back(total_variation(rep.coupling.matrix(), r.alternate.coupling.matrix()));
  }
  const MonotoneChoice first = inner_gw_1d(make_uniform_measure(x.col(0)), make_uniform_measure(y.col(0)));
  r.first_coordinate_direction = first.direction;
  r.first_coordinate_matches =
      total_variation(r.reports.back().coupling.matrix(), first.coupling.matrix()) <= 1e-9;
  return r;
}

std::string write_hw_degeneration(const HWDegenerationResult& r, const HWDegenerationConfig& config,
                                  const std::filesystem::path& out) {
  ensure_dir(out);
  io::write_points_csv(out / "source.csv", make_uniform_measure(r.source));
  io::write_points_csv(out / "target.csv", make_uniform_measure(r.target));
  io::write_coupling_csv(out / "alternate_kr.csv", r.alternate.coupling.matrix());
  std::ostringstream trace;
  trace << "t,energy,iterations,converged,tv_to_alternate_kr\n";
  ordered_json steps = ordered_json::array();
  for (std::size_t k = 0; k < r.reports.size(); ++k) {
    const CGReport& rep = r.reports[k];
    io::write_coupling_csv(out / ("coupling_t" + std::to_string(k) + ".csv"), rep.coupling.matrix());
    trace << io::format_double(config.t_schedule[k]) << ',' << io::format_double(rep.energy_trace.back()) << ','
          << rep.iterations << ',' << (rep.converged ? 1 : 0) << ',' << io::format_double(r.tv_to_alternate[k]) << '\n';
    steps.push_back({{"t", number(config.t_schedule[k])},
                     {"file", "coupling_t" + std::to_string(k) + ".csv"},
                     {"energy", number(rep.energy_trace.back())},
                     {"iterations", rep.iterations},
                     {"tv_to_alternate_kr", number(r.tv_to_alternate[k])}});
  }
  io::write_text(out / "trace.csv", trace.str());
  bool nonincreasing = true;
  for (std::size_t k = 1; k < r.tv_to_alternate.size(); ++k) {
    nonincreasing = nonincreasing && r.tv_to_alternate[k] <= r.tv_to_alternate[k - 1] + 1e-12;
  }
  ordered_json dirs = ordered_json::array();
  for (Direction d : r.alternate.level_directions) dirs.push_back(direction_name(d));
  ordered_json j;
  j["experiment"] = "hw-degeneration";
  j["seed"] = config.seed;
  j["n_points"] = config.n_points;
  j["schedule"] = steps;
  j["tv_nonincreasing"] = nonincreasing;
  j["final_tv_to_alternate_kr"] = number(r.tv_to_alternate.back());
  j["alternate_kr_level_directions"] = dirs;
  j["first_coordinate_direction"] = direction_name(r.first_coordinate_direction);
  j["final_matches_first_coordinate_inner_gw"] = r.first_coordinate_matches;
  const std::string text = dump(j);
  io::write_text(out / "summary.json", text);
  return text;
}

MeshFixture make_mesh_fixture(std::uint64_t seed, int subdivisions) {
  Rng rng(seed);
  const Mesh sphere = make_icosphere(subdivisions);
  const Eigen::Index n = sphere.size();
  Matrix v = sphere.vertices();
  const Eigen::RowVector3d bump_center = Eigen::RowVector3d(0.3, 0.5, 0.8).normalized();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d2 = (v.row(i) - bump_center).squaredNorm();
    v.row(i) *= 1.0 + 0.4 * std::exp(-d2 / 0.1);
  }
  v.col(0) *= 1.6;
  v.col(1) *= 1.0;
  v.col(2) *= 0.7;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) v(i, c) += 0.005 * rng.normal();
  }
  Mesh source(v, sphere.faces());

  // random relabeling: target label of source vertex i is perm[i]
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  Matrix g(3, 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix rot = qr.householderQ();
  if (rot.determinant() < 0) rot.col(0) *= -1.0;
  const Eigen::RowVector3d shift(rng.normal(), rng.normal(), rng.normal());

  Matrix tv(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) tv.row(perm[static_cast<std::size_t>(i)]) = v.row(i) * rot.transpose() + shift;
  std::vector<Face> tf;
  tf.reserve(sphere.faces().size());
  for (const Face& f : sphere.faces()) {
    tf.push_back({perm[static_cast<std::size_t>(f[0])], perm[static_cast<std::size_t>(f[1])],
                  perm[static_cast<std::size_t>(f[2])]});
  }
  return {std::move(source), Mesh(std::move(tv), std::move(tf)), std::move(perm)};
}

void write_mesh_fixture(const MeshFixture& fixture, const std::filesystem::path& out) {
  ensure_dir(out);
  save_off(out / "source.off", fixture.source);
  save_off(out / "target.off", fixture.target);
  std::ostringstream gt;
  for (Eigen::Index g : fixture.ground_truth) gt << g << '\n';
  io::write_text(out / "ground_truth.txt", gt.str());
}

std::string write_registration(const Assignment& result, const Mesh& src, const Mesh& dst,
                               const RegisterConfig& config, const std::filesystem::path& out) {
  ensure_dir(out);
  std::ostringstream csv;
  csv << "src_index,dst_index\n";
  for (std::size_t i = 0; i < result.mapping.size(); ++i) csv << i << ',' << result.mapping[i] << '\n';
  io::write_text(out / "mapping.csv", csv.str());
  const auto& o = config.options;
  ordered_json j;
  j["experiment"] = "register";
  j["method"] = o.method == RegistrationMethod::Fiedler ? "fiedler" : "gw-adjacency";
  j["weighting"] = o.weighting == EdgeWeighting::Unit              ? "unit"
                   : o.weighting == EdgeWeighting::InverseDistance ? "inverse-distance"
                                                                   : "distance";
  j["source_vertices"] = src.size();
  j["target_vertices"] = dst.size();
  j["accuracy"] = result.accuracy ? number(*result.accuracy) : ordered_json(nullptr);
  if (o.method == RegistrationMethod::Fiedler) {
    j["direction"] = direction_name(result.direction);
    j["degenerate_spectrum"] = result.degenerate_spectrum;
  }
  const std::string text = dump(j);
  io::write_text(out / "summary.json", text);
  return text;
}

std::string gauss_report(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "top-level JSON must be an object");
  const GaussianMeasure mu = gaussian_from_json(doc.value("source", nlohmann::json()), "source");
  const GaussianMeasure nu = gaussian_from_json(doc.value("target", nlohmann::json()), "target");
  const auto k = static_cast<Eigen::Index>(doc.value("k", 1));
  if (!doc.contains("E") && (k < 1 || k > nu.dim())) throw Error(ErrorCode::DimensionMismatch, "k must lie in [1, dim(target)]");
  const Subspace e = subspace_from_json(doc, "E", mu.dim(), k);
  const Subspace f = subspace_from_json(doc, "F", nu.dim(), doc.contains("E") && !doc.contains("F") ? e.dim() : k);
  std::optional<Vector> signs;
  if (doc.contains("signs")) signs = vector_from_json(doc["signs"], "signs");

  ordered_json j;
  j["p"] = mu.dim();
  j["q"] = nu.dim();
  j["k"] = e.dim();
  j["k_prime"] = f.dim();

  const AffineMap ggw = ggw_map(mu, nu, signs);
  j["ggw"] = {{"linear", matrix_json(ggw.linear)},
              {"offset", matrix_json(ggw.offset.transpose())[0]},
              {"pushforward_residual",
               number((ggw.linear * mu.covariance() * ggw.linear.transpose() - nu.covariance()).norm())}};

  const MKGaussianMap mk = mk_gaussian_map(mu, nu, e, f);
  j["monge_knothe"] = {
      {"B", matrix_json(mk.map.linear)},
      {"B_adapted", matrix_json(mk.block)},
      {"C", matrix_json(mk.c)},
      {"offset", matrix_json(mk.map.offset.transpose())[0]},
      {"pushforward_residual",
       number((mk.map.linear * mu.covariance() * mk.map.linear.transpose() - nu.covariance()).norm())}};

  if (mu.mean().cwiseAbs().maxCoeff() > 0.0 || nu.mean().cwiseAbs().maxCoeff() > 0.0) {
    j["monge_independent"] = {{"error", "NotCentered"}, {"message", "the Monge-Independent closed form needs zero means"}};
  } else {
    const GaussianMeasure plan = mi_gaussian_plan(mu, nu, e, f);
    j["monge_independent"] = {{"C", matrix_json(plan.covariance().topRightCorner(mu.dim(), nu.dim()))},
                              {"Gamma", matrix_json(plan.covariance())},
                              {"min_eigenvalue", number(min_eigenvalue(plan.covariance()))}};
  }
  return dump(j);
}

}  // namespace gwd::experiments
