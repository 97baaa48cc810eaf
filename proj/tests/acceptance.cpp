// Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "gwdetours/experiments.hpp"
#include "gwdetours/gaussian_closed_forms.hpp"
#include "gwdetours/gw_1d.hpp"
#include "gwdetours/gw_solver.hpp"
#include "gwdetours/hadamard.hpp"
#include "gwdetours/subspace_detour.hpp"
#include "oracles.hpp"

using namespace gwd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double half_l1(const Matrix& a, const Matrix& b) { return 0.5 * (a - b).cwiseAbs().sum(); }

// Fraction of source atoms whose heaviest target (lowest index on ties) is the same index.
double diagonal_accuracy(const Matrix& plan) {
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < plan.cols(); ++j)
      if (plan(i, j) > plan(i, best)) best = j;
    hits += best == i;
  }
  return static_cast<double>(hits) / static_cast<double>(plan.rows());
}

Outcome contraction() {
  Outcome o;
  Rng rng(101);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto n = 1 + static_cast<Eigen::Index>(rng.below(8));
    const auto m = 1 + static_cast<Eigen::Index>(rng.below(8));
    const auto d = 1 + static_cast<Eigen::Index>(rng.below(4));
    const Matrix x = oracle::gaussian_matrix(n, d, rng), y = oracle::gaussian_matrix(m, d, rng);
    const Vector p = oracle::random_simplex(n, rng), q = oracle::random_simplex(m, rng);
    const Matrix g = oracle::random_coupling(p, q, rng);

    const auto cx = squared_distance_similarity(x), cy = squared_distance_similarity(y);
    const Matrix gw_fast = gw_tensor_product(cx, cy, g);
    worst = std::max(worst, (gw_fast - oracle::gw_tensor(cx.matrix(), cy.matrix(), g)).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs((gw_fast.array() * g.array()).sum() - gw_energy(cx, cy, g)));
    worst = std::max(worst, std::abs(gw_energy(cx, cy, g) - oracle::gw_energy(cx.matrix(), cy.matrix(), g)));

    const Vector lambda = rep % 2 ? degenerate_weights(d, rng.uniform(1e-3, 1.0)) : Vector::Ones(d);
    const HWInstance inst(x, y, p, q, lambda);
    const Matrix hw_fast = hw_tensor_product(inst, g);
    worst = std::max(worst, (hw_fast - oracle::hw_tensor(x, y, lambda, g)).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs((hw_fast.array() * g.array()).sum() - hw_energy(inst, g)));
    worst = std::max(worst, std::abs(hw_energy(inst, g) - oracle::hw_energy(x, y, lambda, g)));
  }
  require(o, worst <= 1e-10, "max deviation " + fmt("%.3g", worst));
  o.detail = o.pass ? "max deviation " + fmt("%.3g", worst) : o.detail;
  return o;
}

Outcome inner_gw_optimality() {
  Outcome o;
  Rng rng(202);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(rng.below(7));
    const Matrix x = oracle::gaussian_matrix(n, 1, rng), y = oracle::gaussian_matrix(n, 1, rng);
    const auto r = inner_gw_1d(make_uniform_measure(x), make_uniform_measure(y));
    const Matrix gx = x * x.transpose(), gy = y * y.transpose();
    const auto best = oracle::min_over_permutations(n, [&](const Matrix& g) { return oracle::gw_energy(gx, gy, g); });
    worst = std::max(worst, std::abs(r.cost - best.value));
  }
  require(o, worst <= 1e-9, "max |cost - permutation minimum| " + fmt("%.3g", worst));
  if (o.pass) o.detail = "max |cost - permutation minimum| " + fmt("%.3g", worst);
  return o;
}

Outcome cg_soundness() {
  Outcome o;
  Rng rng(303);
  double residual = 0.0;
  int monotone_violations = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto n = 2 + static_cast<Eigen::Index>(rng.below(19));
    const auto m = 2 + static_cast<Eigen::Index>(rng.below(19));
    const auto d = 1 + static_cast<Eigen::Index>(rng.below(3));
    const Matrix x = oracle::gaussian_matrix(n, d, rng), y = oracle::gaussian_matrix(m, d, rng);
    const Vector p = oracle::random_simplex(n, rng), q = oracle::random_simplex(m, rng);
    CGReport r = [&] {
      if (rep % 2 == 0) return solve_hw(HWInstance(x, y, p, q, degenerate_weights(d, rng.uniform(1e-3, 1.0))));
      const bool inner = rep % 4 == 1;
      return solve_gw_cg(inner ? inner_product_similarity(x) : squared_distance_similarity(x),
                         inner ? inner_product_similarity(y) : squared_distance_similarity(y), p, q);
    }();
    residual = std::max(residual, oracle::max_marginal_residual(r.coupling.matrix(), p, q));
    monotone_violations += !oracle::nonincreasing(r.energy_trace, 1e-12);
  }
  require(o, residual <= 1e-9, "marginal residual " + fmt("%.3g", residual));
  require(o, monotone_violations == 0, std::to_string(monotone_violations) + " traces increase");
  if (o.pass) o.detail = "max marginal residual " + fmt("%.3g", residual) + ", all traces nonincreasing";
  return o;
}

Outcome degeneration() {
  Outcome o;
  const experiments::HWDegenerationConfig cfg;
  const auto r = experiments::run_hw_degeneration(cfg);
  std::string trace;
  double prev = 2.0;
  for (std::size_t k = 0; k < r.reports.size(); ++k) {
    const double tv = half_l1(r.reports[k].coupling.matrix(), r.alternate.coupling.matrix());
    trace += (k ? ", " : "") + fmt("%.4g", tv);
    require(o, tv <= prev + 1e-12, "TV increases at t=" + fmt("%g", cfg.t_schedule[k]));
    prev = tv;
  }
  require(o, prev <= 0.05, "final TV " + fmt("%.4g", prev) + " > 0.05");
  const Matrix first = r.source.leftCols(1), first_target = r.target.leftCols(1);
  const auto one = inner_gw_1d(make_uniform_measure(first), make_uniform_measure(first_target));
  const double gap = (r.reports.back().coupling.matrix() - one.coupling.matrix()).cwiseAbs().maxCoeff();
  require(o, gap <= 1e-9, "final plan differs from the first-coordinate inner-GW plan");
  if (o.pass)
    o.detail = "TV trace [" + trace + "], final plan equals the " + direction_name(one.direction) +
               " first-coordinate 1D plan";
  return o;
}

Outcome gaussian() {
  Outcome o;
  Rng rng(505);
  double worst_push = 0.0, min_eig = 1.0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto q = 1 + static_cast<Eigen::Index>(rng.below(6));
    const auto p = q + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(11 - q)));
    const auto k = 1 + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(std::min<Eigen::Index>(3, q))));
    const Matrix sigma = oracle::random_spd(p, rng), lambda = oracle::random_spd(q, rng);
    const auto e = Subspace::from_spanning(oracle::gaussian_matrix(p, k, rng));
    const auto f = Subspace::from_spanning(oracle::gaussian_matrix(q, k, rng));
    const GaussianMeasure mu(Vector::Zero(p), sigma), nu(Vector::Zero(q), lambda);
    const auto mk = mk_gaussian_map(mu, nu, e, f);
    worst_push = std::max(worst_push, (mk.map.linear * sigma * mk.map.linear.transpose() - lambda).norm());
    require(o, (mk.block.topRightCorner(k, p - k).array() == 0.0).all(), "upper-right block not exactly 0");
    const auto gamma = mi_gaussian_plan(mu, nu, e, f);
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(gamma.covariance()).eigenvalues().minCoeff());
    require(o, gamma.covariance().topLeftCorner(p, p) == sigma, "Gamma top-left block differs from Sigma");
    require(o, gamma.covariance().bottomRightCorner(q, q) == lambda, "Gamma bottom-right block differs from Lambda");
  }
  require(o, worst_push <= 1e-8, "pushforward residual " + fmt("%.3g", worst_push));
  require(o, min_eig >= -1e-10, "Gamma min eigenvalue " + fmt("%.3g", min_eig));
  if (o.pass) o.detail = "max ||B S B^T - L||_F " + fmt("%.3g", worst_push) + ", min eig(Gamma) " + fmt("%.3g", min_eig);
  return o;
}

Outcome pseudometric() {
  Outcome o;
  Rng rng(606);
  double sym = 0.0, self = 0.0, tri = -1.0, refl = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const auto d = 1 + static_cast<Eigen::Index>(rng.below(3));
    const Vector u = Vector::Constant(n, 1.0 / n);
    const Matrix a = oracle::gaussian_matrix(n, d, rng), b = oracle::gaussian_matrix(n, d, rng),
                 c = oracle::gaussian_matrix(n, d, rng);
    auto hw = [&](const Matrix& x, const Matrix& y) {
      const HWInstance inst(x, y, u, u);
      return oracle::min_over_permutations(n, [&](const Matrix& g) { return hw_energy(inst, g); }).value;
    };
    const double ab = hw(a, b), ba = hw(b, a), ac = hw(a, c), cb = hw(c, b);
    sym = std::max(sym, std::abs(ab - ba));
    self = std::max(self, std::abs(hw(a, a)));
    // HW is a squared distance, as GW is; the metric is its square root.
    tri = std::max(tri, std::sqrt(ab) - std::sqrt(ac) - std::sqrt(cb));

    Matrix flipped = a;
    flipped.col(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d)))) *= -1.0;
    const Vector p = oracle::random_simplex(n, rng), q = oracle::random_simplex(n, rng);
    const Matrix g = oracle::random_coupling(p, q, rng);
    refl = std::max(refl, std::abs(hw_energy(HWInstance(a, b, p, q), g) - hw_energy(HWInstance(flipped, b, p, q), g)));
  }
  require(o, sym <= 1e-10, "symmetry gap " + fmt("%.3g", sym));
  require(o, self <= 1e-9, "HW(mu,mu) " + fmt("%.3g", self));
  require(o, tri <= 1e-9, "triangle excess " + fmt("%.3g", tri));
  require(o, refl <= 1e-10, "reflection gap " + fmt("%.3g", refl));
  if (o.pass)
    o.detail = "symmetry " + fmt("%.2g", sym) + ", self " + fmt("%.2g", self) + ", triangle excess " +
               fmt("%.2g", tri) + ", reflection " + fmt("%.2g", refl);
  return o;
}

Outcome fiber() {
  Outcome o;
  Rng rng(707);
  double residual = 0.0;
  int mk_above_mi = 0;
  double worst_excess = 0.0;
  for (int rep = 0; rep < 40; ++rep) {
    const auto n = 8 + static_cast<Eigen::Index>(rng.below(20));
    const auto m = 8 + static_cast<Eigen::Index>(rng.below(20));
    const Matrix x = oracle::gaussian_matrix(n, 2, rng), y = oracle::gaussian_matrix(m, 2, rng);
    const auto mu = make_uniform_measure(x), nu = make_uniform_measure(y);
    const bool quantized = rep < 20;
    DetourOptions opt;
    opt.quantization = quantized ? 0.75 : 0.0;
    const auto e = pca_subspace(mu, 1), f = pca_subspace(nu, 1);
    const auto sub = subspace_optimal_plan(mu, nu, e, f, SubspaceSolver::InnerGW1D, opt);
    const auto mi = monge_independent(mu, nu, e, f, sub);
    const auto mk = monge_knothe(mu, nu, e, f, sub, OrthogonalSolver::GWSquare, opt);
    for (const auto* plan : {&mi, &mk}) {
      // Aggregate the full plan over the bins independently of the library.
      Matrix agg = Matrix::Zero(sub.plan.rows(), sub.plan.cols());
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
          agg(sub.source_bins.bin_of[i], sub.target_bins.bin_of[j]) += plan->full_plan.matrix()(i, j);
      residual = std::max(residual, (agg - sub.plan.matrix()).cwiseAbs().maxCoeff());
    }
    if (quantized) {
      const double emi = oracle::gw_energy(oracle::squared_distances(x), oracle::squared_distances(y),
                                           mi.full_plan.matrix());
      const double emk = oracle::gw_energy(oracle::squared_distances(x), oracle::squared_distances(y),
                                           mk.full_plan.matrix());
      if (emk > emi + 1e-12) {
        ++mk_above_mi;
        worst_excess = std::max(worst_excess, (emk - emi) / emi);
      }
    }
  }
  require(o, residual <= 1e-9, "fiber residual " + fmt("%.3g", residual));
  require(o, mk_above_mi == 0,
          "MK energy above MI on " + std::to_string(mk_above_mi) + "/20 quantized instances (worst +" +
              fmt("%.2f", 100 * worst_excess) + "%); fiber residual " + fmt("%.3g", residual));
  if (o.pass) o.detail = "fiber residual " + fmt("%.3g", residual) + ", MK <= MI on 20/20";
  return o;
}

Outcome moons() {
  Outcome o;
  const auto r = experiments::run_moons({});
  const double gw = diagonal_accuracy(r.gw_plan), axis = diagonal_accuracy(r.axis_plan),
               pca = diagonal_accuracy(r.pca_plan);
  const Matrix cx = oracle::squared_distances(r.source), cy = oracle::squared_distances(r.target);
  const double energy = oracle::gw_energy(cx, cy, r.gw_plan);
  require(o, pca >= 0.95, "PCA detour accuracy " + fmt("%.3f", pca));
  require(o, axis < 0.5, "shared-axis accuracy " + fmt("%.3f", axis));
  require(o, gw == 1.0, "GW accuracy " + fmt("%.3f", gw));
  require(o, energy <= 1e-8, "GW energy " + fmt("%.3g", energy));
  if (o.pass)
    o.detail = "PCA " + fmt("%.2f", pca) + ", shared axis " + fmt("%.2f", axis) + ", GW " + fmt("%.2f", gw) +
               " with energy " + fmt("%.2g", energy);
  return o;
}

Outcome mesh(double& seconds) {
  Outcome o;
  const auto fx = experiments::make_mesh_fixture(0);
  RegistrationOptions opt;
  opt.weighting = EdgeWeighting::InverseDistance;
  const auto start = std::chrono::steady_clock::now();
  const auto a = register_meshes(fx.source, fx.target, std::nullopt, opt);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.mapping.size(); ++i) hits += a.mapping[i] == fx.ground_truth[i];
  const double acc = static_cast<double>(hits) / static_cast<double>(a.mapping.size());
  require(o, acc >= 0.98, "accuracy " + fmt("%.4f", acc));
  require(o, seconds < 5.0, "registration took " + fmt("%.2f", seconds) + " s");
  if (o.pass)
    o.detail = std::to_string(fx.source.size()) + " vertices, accuracy " + fmt("%.4f", acc) + " in " +
               fmt("%.2f", seconds) + " s (synthetic substitute; FAUST not shipped)";
  return o;
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::current_path() / "acceptance_determinism";
  fs::remove_all(root);
  const std::string cli = GWD_CLI_PATH;
  const fs::path gauss_in = root / "gauss.json";
  fs::create_directories(root);
  std::ofstream(gauss_in) << R"({"source": {"mean": [0, 0, 0], "covariance": [[2, 0.3, 0], [0.3, 1, 0.2], [0, 0.2, 1.5]]},
 "target": {"mean": [0, 0], "covariance": [[1, 0.1], [0.1, 3]]}, "k": 1})";
  int files = 0;
  for (const char* run : {"run1", "run2"}) {
    const fs::path dir = root / run;
    const std::string q = " >/dev/null 2>&1";
    require(o, shell(cli + " moons --seed 7 --out " + (dir / "moons").string() + q) == 0, "moons failed");
    require(o, shell(cli + " hw-degeneration --seed 7 --out " + (dir / "hw").string() + q) == 0, "hw failed");
    require(o, shell(cli + " mesh-fixture --seed 7 --out " + (dir / "fixture").string() + q) == 0, "fixture failed");
    const fs::path fx = dir / "fixture";
    require(o,
            shell(cli + " register " + (fx / "source.off").string() + " " + (fx / "target.off").string() +
                  " --ground-truth " + (fx / "ground_truth.txt").string() +
                  " --weighting inverse-distance --out " + (dir / "register").string() + q) == 0,
            "register failed");
    require(o, shell(cli + " gauss " + gauss_in.string() + " > " + (dir / "gauss.json").string() + " 2>/dev/null") == 0,
            "gauss failed");
  }
  for (const auto& entry : fs::recursive_directory_iterator(root / "run1")) {
    if (!entry.is_regular_file()) continue;
    const fs::path twin = root / "run2" / fs::relative(entry.path(), root / "run1");
    require(o, fs::exists(twin) && slurp(entry.path()) == slurp(twin),
            "differs: " + fs::relative(entry.path(), root).string());
    ++files;
  }
  require(o, files >= 15, "too few artifacts: " + std::to_string(files));
  if (o.pass) o.detail = std::to_string(files) + " artifacts byte-identical across two runs of 5 subcommands";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, double limit, const std::function<Outcome()>& run) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit > 0 && secs >= limit) {
      o.pass = false;
      o.detail += "; runtime " + fmt("%.2f", secs) + " s exceeds " + fmt("%g", limit) + " s";
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s (%s) [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };
  double mesh_seconds = 0.0;
  report(1, "contraction correctness", 1.0, contraction);
  report(2, "1D inner-GW optimality", 0, inner_gw_optimality);
  report(3, "conditional-gradient soundness", 0, cg_soundness);
  report(4, "HW_t convergence to alternate KR", 30.0, degeneration);
  report(5, "Gaussian closed forms", 5.0, gaussian);
  report(6, "HW pseudometric suite", 0, pseudometric);
  report(7, "subspace-detour fiber constraint and MK <= MI", 0, fiber);
  report(8, "moons experiment", 10.0, moons);
  report(9, "mesh registration", 0, [&] { return mesh(mesh_seconds); });
  report(10, "CLI determinism", 0, determinism);
  return failures == 0 ? 0 : 1;
}
