#include "gwdetours/spectral_mesh.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include "gwdetours/gw_solver.hpp"
#include "gwdetours/io.hpp"

namespace gwd {

namespace {

Edge ordered(Eigen::Index a, Eigen::Index b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

double to_double(const std::string& s, const std::filesystem::path& path, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) parse_fail(path, line_no, "bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_fail(path, line_no, "bad number '" + s + "'");
  }
}

long long to_integer(const std::string& s, const std::filesystem::path& path, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) parse_fail(path, line_no, "bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_fail(path, line_no, "bad integer '" + s + "'");
  }
}

void add_polygon(std::vector<Face>& faces, const std::vector<long long>& corners, Eigen::Index n) {
  for (long long c : corners) {
    if (c < 0 || c >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "face index " + std::to_string(c) + " outside [0, " +
                                                  std::to_string(n) + ")");
    }
  }
  for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
    faces.push_back({static_cast<Eigen::Index>(corners[0]), static_cast<Eigen::Index>(corners[k]),
                     static_cast<Eigen::Index>(corners[k + 1])});
  }
}

Mesh load_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> pending;
  auto next_tokens = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      pending = tokens_of(strip_comment(line));
      if (!pending.empty()) return true;
    }
    return false;
  };
  if (!next_tokens() || pending[0].rfind("OFF", 0) != 0) parse_fail(path, line_no, "missing OFF header");
  pending.erase(pending.begin());
  if (pending.empty() && !next_tokens()) parse_fail(path, line_no, "missing counts");
  if (pending.size() < 2) parse_fail(path, line_no, "expected vertex and face counts");
  const long long nv = to_integer(pending[0], path, line_no);
  const long long nf = to_integer(pending[1], path, line_no);
  if (nv <= 0 || nf < 0) parse_fail(path, line_no, "invalid counts");
  Matrix v(nv, 3);
  for (long long i = 0; i < nv; ++i) {
    if (!next_tokens()) parse_fail(path, line_no, "unexpected end of vertices");
    if (pending.size() < 3) parse_fail(path, line_no, "vertex needs three coordinates");
    for (int c = 0; c < 3; ++c) v(i, c) = to_double(pending[static_cast<std::size_t>(c)], path, line_no);
  }
  std::vector<Face> faces;
  for (long long f = 0; f < nf; ++f) {
    if (!next_tokens()) parse_fail(path, line_no, "unexpected end of faces");
    const long long k = to_integer(pending[0], path, line_no);
    if (k < 3 || static_cast<long long>(pending.size()) < k + 1) parse_fail(path, line_no, "bad face record");
    std::vector<long long> corners;
    for (long long c = 1; c <= k; ++c) corners.push_back(to_integer(pending[static_cast<std::size_t>(c)], path, line_no));
    add_polygon(faces, corners, nv);
  }
  return Mesh(std::move(v), std::move(faces));
}

Mesh load_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  struct Property {
    std::string name;
    bool is_list;
  };
  struct Element {
    std::string name;
    long long count;
    std::vector<Property> props;
  };
  std::vector<Element> elements;
  std::string line;
  std::size_t line_no = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = tokens_of(line);
    if (t.empty()) continue;
    if (line_no == 1) {
      if (t[0] != "ply") parse_fail(path, line_no, "missing ply magic");
      continue;
    }
    if (t[0] == "format") {
      if (t.size() < 2 || t[1] != "ascii") parse_fail(path, line_no, "only ASCII PLY is supported");
    } else if (t[0] == "element") {
      if (t.size() < 3) parse_fail(path, line_no, "bad element line");
      elements.push_back({t[1], to_integer(t[2], path, line_no), {}});
    } else if (t[0] == "property") {
      if (elements.empty() || t.size() < 3) parse_fail(path, line_no, "property outside an element");
      const bool list = t[1] == "list";
      if (list && t.size() < 5) parse_fail(path, line_no, "bad list property");
      elements.back().props.push_back({t.back(), list});
    } else if (t[0] == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) parse_fail(path, line_no, "missing end_header");

  Matrix v;
  long long nv = -1;
  std::vector<std::vector<long long>> polygons;
  for (const Element& el : elements) {
    int ix = -1, iy = -1, iz = -1;
    for (std::size_t p = 0; p < el.props.size(); ++p) {
      if (el.props[p].name == "x") ix = static_cast<int>(p);
      if (el.props[p].name == "y") iy = static_cast<int>(p);
      if (el.props[p].name == "z") iz = static_cast<int>(p);
    }
    if (el.name == "vertex") {
      if (ix < 0 || iy < 0 || iz < 0) parse_fail(path, line_no, "vertex element lacks x, y, z");
      nv = el.count;
      v.resize(el.count, 3);
    }
    for (long long r = 0; r < el.count; ++r) {
      if (!std::getline(in, line)) parse_fail(path, line_no, "unexpected end of data");
      ++line_no;
      const auto t = tokens_of(line);
      std::size_t pos = 0;
      std::vector<double> scalars;
      std::vector<long long> list;
      bool have_list = false;
      for (const Property& prop : el.props) {
        if (pos >= t.size()) parse_fail(path, line_no, "record too short");
        if (prop.is_list) {
          const long long k = to_integer(t[pos++], path, line_no);
          if (k < 0 || pos + static_cast<std::size_t>(k) > t.size()) parse_fail(path, line_no, "bad list length");
          std::vector<long long> values;
          for (long long c = 0; c < k; ++c) values.push_back(to_integer(t[pos++], path, line_no));
          if (!have_list) {
            list = std::move(values);
            have_list = true;
          }
          scalars.push_back(0.0);
        } else {
          scalars.push_back(to_double(t[pos++], path, line_no));
        }
      }
      if (el.name == "vertex") {
        v(r, 0) = scalars[static_cast<std::size_t>(ix)];
        v(r, 1) = scalars[static_cast<std::size_t>(iy)];
        v(r, 2) = scalars[static_cast<std::size_t>(iz)];
      } else if (el.name == "face") {
        if (!have_list || list.size() < 3) parse_fail(path, line_no, "face without vertex list");
        polygons.push_back(std::move(list));
      }
    }
  }
  if (nv <= 0) parse_fail(path, line_no, "no vertices");
  std::vector<Face> faces;
  for (const auto& poly : polygons) add_polygon(faces, poly, nv);
  return Mesh(std::move(v), std::move(faces));
}

double edge_weight(const Matrix& v, const Edge& e, EdgeWeighting weighting) {
  if (weighting == EdgeWeighting::Unit) return 1.0;
  const double d = (v.row(e.first) - v.row(e.second)).norm();
  if (weighting == EdgeWeighting::Distance) return d;
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero-length edge under inverse-distance weighting");
  return 1.0 / d;
}

void finish_fiedler(const SparseMatrix& lap, FiedlerResult& out) {
  const Eigen::Index n = lap.rows();
  out.vector.array() -= out.vector.mean();
  out.vector.normalize();
  canonicalize_sign(out.vector);
  out.eigenvalue = out.vector.dot(lap * out.vector);
  out.residual = (lap * out.vector - out.eigenvalue * out.vector).norm();
  out.degenerate = n > 2 && std::abs(out.third_eigenvalue - out.eigenvalue) <= 1e-6 * std::max(1.0, out.eigenvalue);
}

FiedlerResult fiedler_dense(const SparseMatrix& lap) {
  const Matrix dense(lap);
  Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "dense eigensolver failed");
  FiedlerResult out;
  out.vector = es.eigenvectors().col(1);
  out.third_eigenvalue = lap.rows() > 2 ? es.eigenvalues()(2) : es.eigenvalues()(1);
  return out;
}

Matrix orthonormal_deflated(Matrix y) {
  y.rowwise() -= y.colwise().mean();  // remove the constant direction
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

FiedlerResult fiedler_iterative(const SparseMatrix& lap, const FiedlerOptions& options) {
  const Eigen::Index n = lap.rows();
  const Eigen::Index s = std::min<Eigen::Index>(6, n - 1);
  const double sigma = 1e-6 * std::max(1.0, Vector(lap.diagonal()).maxCoeff());
  SparseMatrix shifted = lap;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "factorization of L + sigma I failed");

  Rng rng(0x9e3779b97f4a7c15ULL);
  Matrix x(n, s);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < s; ++c) x(i, c) = rng.normal();
  }
  x = orthonormal_deflated(x);
  FiedlerResult out;
  for (int it = 0; it < options.max_iter; ++it) {
    const Matrix q = orthonormal_deflated(ldlt.solve(x));
    const Matrix h = q.transpose() * (lap * q);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()));
    x = q * es.eigenvectors();
    const Vector v = x.col(0);
    const double lambda = es.eigenvalues()(0);
    if ((lap * v - lambda * v).norm() <= options.tol) {
      out.vector = v;
      out.third_eigenvalue = s > 1 ? es.eigenvalues()(1) : lambda;
      return out;
    }
  }
  throw Error(ErrorCode::ConvergenceFailure, "inverse iteration did not reach the residual tolerance");
}

}  // namespace

Mesh::Mesh(Matrix vertices, std::vector<Face> faces, std::vector<Edge> extra_edges)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const Eigen::Index n = vertices_.rows();
  if (n == 0) throw Error(ErrorCode::EmptySupport, "mesh without vertices");
  if (!vertices_.allFinite()) throw Error(ErrorCode::NonFiniteValue, "mesh vertex is not finite");
  auto check = [n](Eigen::Index i) {
    if (i < 0 || i >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "vertex index " + std::to_string(i) + " outside [0, " +
                                                  std::to_string(n) + ")");
    }
  };
  for (const Face& f : faces_) {
    for (Eigen::Index i : f) check(i);
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw Error(ErrorCode::InvalidArgument, "face repeats a vertex");
    }
    edges_.push_back(ordered(f[0], f[1]));
    edges_.push_back(ordered(f[1], f[2]));
    edges_.push_back(ordered(f[0], f[2]));
  }
  for (const Edge& e : extra_edges) {
    check(e.first);
    check(e.second);
    if (e.first == e.second) throw Error(ErrorCode::InvalidArgument, "self-loop edge");
    edges_.push_back(ordered(e.first, e.second));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(n));
  for (const Edge& e : edges_) {
    adj[static_cast<std::size_t>(e.first)].push_back(e.second);
    adj[static_cast<std::size_t>(e.second)].push_back(e.first);
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!stack.empty()) {
    const Eigen::Index u = stack.back();
    stack.pop_back();
    for (Eigen::Index w : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  if (reached != n) {
    throw Error(ErrorCode::DisconnectedGraph, "mesh graph has " + std::to_string(n - reached) + " unreachable vertices");
  }
}

Mesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  return format == MeshFormat::OFF ? load_off(path) : load_ply(path);
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return load_mesh(path, MeshFormat::OFF);
  if (ext == ".ply") return load_mesh(path, MeshFormat::PLY);
  throw Error(ErrorCode::ParseError, "unknown mesh extension '" + ext + "'");
}

void save_off(const std::filesystem::path& path, const Mesh& mesh) {
  std::ostringstream out;
  out << "OFF\n" << mesh.size() << ' ' << mesh.faces().size() << ' ' << mesh.edges().size() << '\n';
  for (Eigen::Index i = 0; i < mesh.size(); ++i) {
    for (Eigen::Index c = 0; c < mesh.vertices().cols(); ++c) {
      out << (c ? " " : "") << io::format_double(mesh.vertices()(i, c));
    }
    out << '\n';
  }
  for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  io::write_text(path, out.str());
}

Mesh make_icosphere(int subdivisions) {
  if (subdivisions < 0) throw Error(ErrorCode::InvalidArgument, "subdivisions must be >= 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                                    {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<Edge, Eigen::Index> midpoint;
    auto mid = [&](Eigen::Index a, Eigen::Index b) {
      const Edge key = ordered(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
      const auto idx = static_cast<Eigen::Index>(v.size() - 1);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const Eigen::Index ab = mid(f[0], f[1]);
      const Eigen::Index bc = mid(f[1], f[2]);
      const Eigen::Index ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  Matrix pts(static_cast<Eigen::Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = v[i].transpose();
  return Mesh(std::move(pts), std::move(faces));
}

SparseMatrix adjacency_matrix(const Mesh& mesh, EdgeWeighting weighting) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.edges().size() * 2);
  for (const Edge& e : mesh.edges()) {
    const double w = edge_weight(mesh.vertices(), e, weighting);
    trip.emplace_back(e.first, e.second, w);
    trip.emplace_back(e.second, e.first, w);
  }
  SparseMatrix w(mesh.size(), mesh.size());
  w.setFromTriplets(trip.begin(), trip.end());
  return w;
}

SparseMatrix unnormalized_laplacian(const Mesh& mesh, EdgeWeighting weighting) {
  const SparseMatrix w = adjacency_matrix(mesh, weighting);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(w.nonZeros() + mesh.size()));
  for (Eigen::Index c = 0; c < w.outerSize(); ++c) {
    double degree = 0.0;
    for (SparseMatrix::InnerIterator it(w, c); it; ++it) {
      degree += it.value();
      trip.emplace_back(it.row(), c, -it.value());
    }
    trip.emplace_back(c, c, degree);
  }
  SparseMatrix lap(mesh.size(), mesh.size());
  lap.setFromTriplets(trip.begin(), trip.end());
  return lap;
}

FiedlerResult fiedler_vector(const SparseMatrix& laplacian, const FiedlerOptions& options) {
  const Eigen::Index n = laplacian.rows();
  if (laplacian.cols() != n) throw Error(ErrorCode::DimensionMismatch, "Laplacian must be square");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "Fiedler vector needs at least two vertices");
  FiedlerResult out = n <= options.dense_limit ? fiedler_dense(laplacian) : fiedler_iterative(laplacian, options);
  finish_fiedler(laplacian, out);
  const double scale = std::max(1.0, Vector(laplacian.diagonal()).maxCoeff());
  if (out.eigenvalue <= 1e-10 * scale) {
    throw Error(ErrorCode::DisconnectedGraph, "second Laplacian eigenvalue is zero");
  }
  if (!(out.residual <= options.tol)) {
    throw Error(ErrorCode::ConvergenceFailure, "Fiedler residual " + io::format_double(out.residual) +
                                                   " exceeds tolerance");
  }
  return out;
}

std::vector<Eigen::Index> argmax_mapping(const Matrix& plan) {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(plan.rows()));
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < plan.cols(); ++j) {
      if (plan(i, j) > plan(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

Assignment register_meshes(const Mesh& src, const Mesh& dst,
                           const std::optional<std::vector<Eigen::Index>>& ground_truth,
                           const RegistrationOptions& options) {
  if (ground_truth) {
    if (static_cast<Eigen::Index>(ground_truth->size()) != src.size()) {
      throw Error(ErrorCode::SizeMismatch, "ground truth has " + std::to_string(ground_truth->size()) +
                                               " entries for " + std::to_string(src.size()) + " source vertices");
    }
    for (Eigen::Index g : *ground_truth) {
      if (g < 0 || g >= dst.size()) throw Error(ErrorCode::IndexOutOfRange, "ground-truth index out of range");
    }
  }
  Assignment out;
  if (options.method == RegistrationMethod::Fiedler) {
    auto spectrum = [&options](const Mesh& m) {
      return fiedler_vector(unnormalized_laplacian(m, options.weighting), options.fiedler);
    };
    FiedlerResult fs, fd;
    if (configured_threads() > 1) {
      auto pending = std::async(std::launch::async, spectrum, std::cref(dst));
      fs = spectrum(src);
      fd = pending.get();
    } else {
      fs = spectrum(src);
      fd = spectrum(dst);
    }
    out.degenerate_spectrum = fs.degenerate || fd.degenerate;
    const MonotoneChoice choice = inner_gw_1d(make_uniform_measure(fs.vector), make_uniform_measure(fd.vector));
    out.direction = choice.direction;
    out.mapping = argmax_mapping(choice.coupling.matrix());
  } else {
    const SimilarityMatrix cx(Matrix(adjacency_matrix(src, options.weighting)));
    const SimilarityMatrix cy(Matrix(adjacency_matrix(dst, options.weighting)));
    const Vector p = Vector::Constant(src.size(), 1.0 / static_cast<double>(src.size()));
    const Vector q = Vector::Constant(dst.size(), 1.0 / static_cast<double>(dst.size()));
    out.mapping = argmax_mapping(solve_gw_cg(cx, cy, p, q, std::nullopt, options.cg).coupling.matrix());
  }
  if (ground_truth) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < out.mapping.size(); ++i) hits += out.mapping[i] == (*ground_truth)[i];
    out.accuracy = static_cast<double>(hits) / static_cast<double>(out.mapping.size());
  }
  return out;
}

}  // namespace gwd
