#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gwdetours/conditional_gradient.hpp"
#include "gwdetours/kr.hpp"
#include "gwdetours/spectral_mesh.hpp"

namespace gwd::experiments {

/// Half circle theta in [0, pi] sampled at n evenly spaced angles, with
/// N(0, noise^2) added to each coordinate.
Matrix make_moon(Eigen::Index n, double noise, Rng& rng);

/// (x, y) -> (-y, x), exact in floating point.
Matrix quarter_turn(const Matrix& points);

/// Fraction of rows i whose argmax column is i.
double identity_accuracy(const Matrix& plan);

struct MoonsConfig {
  std::uint64_t seed = 0;
  Eigen::Index n_points = 100;
  double noise = 0.05;
  double quantization = 0.0;
  CGOptions cg;
};

struct MoonsResult {
  Matrix source, target;
  Matrix gw_plan, axis_plan, pca_plan;
  double gw_energy = 0, gw_accuracy = 0, axis_accuracy = 0, pca_accuracy = 0;
  int gw_iterations = 0;
  bool gw_converged = false;
};

/// Source moon vs its quarter-turn: full square-loss GW, a detour through the
/// shared first axis, and a detour through each measure's first principal axis.
MoonsResult run_moons(const MoonsConfig& config);

/// Writes source.csv, target.csv, coupling_gw.csv, coupling_detour_axis.csv,
/// coupling_detour_pca.csv, summary.json; returns the summary JSON text.
std::string write_moons(const MoonsResult& result, const MoonsConfig& config, const std::filesystem::path& out);

struct HWDegenerationConfig {
  std::uint64_t seed = 0;
  Eigen::Index n_points = 30;
  std::vector<double> t_schedule{1.0, 1e-1, 1e-2, 1e-3};
  double quantization = 0.0;  // grouping width for the alternate KR reference
  CGOptions cg;
};

/// Two 2D Gaussian samples: first coordinates of opposite sign, so the 1D
/// inner-GW coupling of the first coordinates is the decreasing one.
std::pair<Matrix, Matrix> hw_fixture(std::uint64_t seed, Eigen::Index n);

struct HWDegenerationResult {
  Matrix source, target;
  std::vector<CGReport> reports;
  TriangularCoupling alternate;
  std::vector<double> tv_to_alternate;
  Direction first_coordinate_direction = Direction::Ascending;
  bool first_coordinate_matches = false;  // final plan equals the 1D inner-GW plan of first coordinates
};

HWDegenerationResult run_hw_degeneration(const HWDegenerationConfig& config);

/// Writes source.csv, target.csv, coupling_t<k>.csv per schedule entry,
/// alternate_kr.csv, trace.csv, summary.json; returns the summary JSON text.
std::string write_hw_degeneration(const HWDegenerationResult& result, const HWDegenerationConfig& config,
                                  const std::filesystem::path& out);

/// Asymmetric registration fixture: an icosphere stretched along the axes,
/// with a Gaussian bump and vertex jitter; the target is the same mesh with
/// vertices relabeled by a random permutation and moved by a random rotation
/// and translation. ground_truth[i] is the target label of source vertex i.
struct MeshFixture {
  Mesh source;
  Mesh target;
  std::vector<Eigen::Index> ground_truth;
};

MeshFixture make_mesh_fixture(std::uint64_t seed, int subdivisions = 3);

/// Writes source.off, target.off, ground_truth.txt.
void write_mesh_fixture(const MeshFixture& fixture, const std::filesystem::path& out);

struct RegisterConfig {
  RegistrationOptions options;
};

/// Writes mapping.csv (src_index,dst_index) and summary.json; returns the summary JSON text.
std::string write_registration(const Assignment& result, const Mesh& src, const Mesh& dst,
                               const RegisterConfig& config, const std::filesystem::path& out);

/// Evaluates the Gaussian closed forms described by a JSON document and
/// returns a JSON report. Input:
///   {"source": {"mean": [...], "covariance": [[...]]},
///    "target": {"mean": [...], "covariance": [[...]]},
///    "k": 1,                          // E, F = first k canonical axes, or
///    "E": [[...]], "F": [[...]],      // spanning vectors as rows (optional)
///    "signs": [...]}                  // ggw sign pattern (optional)
std::string gauss_report(const std::string& json_text);

}  // namespace gwd::experiments
