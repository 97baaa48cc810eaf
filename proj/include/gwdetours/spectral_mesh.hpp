#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "gwdetours/conditional_gradient.hpp"
#include "gwdetours/gw_1d.hpp"
#include "gwdetours/measures.hpp"

namespace gwd {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Face = std::array<Eigen::Index, 3>;
using Edge = std::pair<Eigen::Index, Eigen::Index>;

/// Vertex positions with triangle faces; the undirected edge set (i < j,
/// sorted) is derived from the faces plus any extra edges given. The graph is
/// checked to be connected.
class Mesh {
 public:
  Mesh(Matrix vertices, std::vector<Face> faces, std::vector<Edge> extra_edges = {});

  const Matrix& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  Eigen::Index size() const noexcept { return vertices_.rows(); }

 private:
  Matrix vertices_;
  std::vector<Face> faces_;
  std::vector<Edge> edges_;
};

enum class MeshFormat { OFF, PLY };

/// Reads an OFF or ASCII PLY file. Polygons with more than three corners are
/// split into triangle fans.
Mesh load_mesh(const std::filesystem::path& path, MeshFormat format);

/// Format chosen from the file extension (.off / .ply).
Mesh load_mesh(const std::filesystem::path& path);

void save_off(const std::filesystem::path& path, const Mesh& mesh);

/// Unit icosahedron refined `subdivisions` times by edge midpoints, projected
/// onto the unit sphere: 10 * 4^s + 2 vertices.
Mesh make_icosphere(int subdivisions);

enum class EdgeWeighting { Unit, InverseDistance, Distance };

/// Weighted adjacency W (zero diagonal) of the mesh graph.
SparseMatrix adjacency_matrix(const Mesh& mesh, EdgeWeighting weighting);

/// L = D - W. Rows sum to exactly zero (the diagonal is accumulated from the
/// same weights that fill the row).
SparseMatrix unnormalized_laplacian(const Mesh& mesh, EdgeWeighting weighting);

struct FiedlerOptions {
  double tol = 1e-8;                // bound on ||L v - lambda_2 v||
  Eigen::Index dense_limit = 3000;  // dense eigensolver up to this size
  int max_iter = 2000;              // iterative path only
};

struct FiedlerResult {
  Vector vector;          // unit norm, orthogonal to 1, largest-magnitude entry positive
  double eigenvalue = 0;  // lambda_2
  double third_eigenvalue = 0;
  double residual = 0;
  bool degenerate = false;  // lambda_3 within 1e-6 (relative) of lambda_2
};

/// Eigenvector of the second-smallest eigenvalue of a connected graph
/// Laplacian. Above dense_limit: block inverse iteration on L + sigma I
/// (sparse LDL^T), deflated against the constant vector, with Rayleigh-Ritz.
FiedlerResult fiedler_vector(const SparseMatrix& laplacian, const FiedlerOptions& options = {});

enum class RegistrationMethod { Fiedler, GWAdjacency };

struct RegistrationOptions {
  RegistrationMethod method = RegistrationMethod::Fiedler;
  EdgeWeighting weighting = EdgeWeighting::Unit;
  FiedlerOptions fiedler;
  CGOptions cg;  // GWAdjacency only
};

struct Assignment {
  std::vector<Eigen::Index> mapping;  // source vertex -> target vertex
  std::optional<double> accuracy;     // against the ground truth, when given
  Direction direction = Direction::Ascending;  // Fiedler only
  bool degenerate_spectrum = false;            // either mesh has a repeated lambda_2
};

/// Registers src onto dst. The Fiedler method couples the two Fiedler vectors
/// as uniform 1D measures with inner_gw_1d; the mapping sends each source
/// vertex to the target vertex receiving most of its mass (lowest index on ties).
Assignment register_meshes(const Mesh& src, const Mesh& dst,
                           const std::optional<std::vector<Eigen::Index>>& ground_truth = std::nullopt,
                           const RegistrationOptions& options = {});

/// Row-wise argmax of a plan (lowest column on ties).
std::vector<Eigen::Index> argmax_mapping(const Matrix& plan);

}  // namespace gwd
