#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gwdetours/experiments.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace gwd;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("moon fixture geometry") {
  Rng rng(0);
  const Matrix moon = experiments::make_moon(50, 0.0, rng);
  CHECK(moon.rows() == 50);
  CHECK(moon(0, 0) == doctest::Approx(1.0));
  CHECK(moon(49, 0) == doctest::Approx(-1.0));
  const Matrix turned = experiments::quarter_turn(moon);
  CHECK((oracle::squared_distances(turned) - oracle::squared_distances(moon)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(experiments::identity_accuracy(Matrix::Identity(4, 4) / 4.0) == 1.0);
}

TEST_CASE("tiny moons run end to end") {
  experiments::MoonsConfig cfg;
  cfg.n_points = 4;
  const auto r = experiments::run_moons(cfg);
  const Vector u = Vector::Constant(4, 0.25);
  for (const Matrix* plan : {&r.gw_plan, &r.axis_plan, &r.pca_plan})
    CHECK(oracle::max_marginal_residual(*plan, u, u) <= 1e-9);
}

TEST_CASE("default moons separate the two detours") {
  const auto r = experiments::run_moons({});
  CHECK(r.pca_accuracy > r.axis_accuracy);
  CHECK(r.gw_energy <= 1e-8);
  CHECK(r.gw_accuracy == 1.0);
}

TEST_CASE("writers are deterministic") {
  const auto base = std::filesystem::temp_directory_path() / "gwd_test_experiments";
  experiments::MoonsConfig cfg;
  cfg.n_points = 20;
  for (const char* sub : {"a", "b"}) {
    const auto summary = experiments::write_moons(experiments::run_moons(cfg), cfg, base / sub);
    CHECK(json::parse(summary)["experiment"] == "moons");
  }
  for (const char* f : {"source.csv", "target.csv", "coupling_gw.csv", "summary.json"})
    CHECK(slurp(base / "a" / f) == slurp(base / "b" / f));

  experiments::HWDegenerationConfig hw;
  hw.n_points = 10;
  const auto summary = json::parse(experiments::write_hw_degeneration(experiments::run_hw_degeneration(hw), hw, base / "hw"));
  CHECK(summary["schedule"].size() == 4);
  CHECK(std::filesystem::exists(base / "hw" / "trace.csv"));
  CHECK(std::filesystem::exists(base / "hw" / "coupling_t3.csv"));
}

TEST_CASE("Gaussian report") {
  const auto out = json::parse(experiments::gauss_report(R"({
    "source": {"mean": [0, 0, 0], "covariance": [[2, 0.3, 0], [0.3, 1, 0.2], [0, 0.2, 1.5]]},
    "target": {"mean": [0, 0], "covariance": [[1, 0.1], [0.1, 3]]},
    "k": 1})"));
  CHECK(out["ggw"]["pushforward_residual"].get<double>() <= 1e-8);
  CHECK(out["monge_knothe"]["pushforward_residual"].get<double>() <= 1e-8);
  CHECK(out["monge_independent"]["min_eigenvalue"].get<double>() >= -1e-10);

  const auto shifted = json::parse(experiments::gauss_report(R"({
    "source": {"mean": [1, 0], "covariance": [[1, 0], [0, 1]]},
    "target": {"mean": [0, 0], "covariance": [[1, 0], [0, 1]]}})"));
  CHECK(shifted["monge_independent"]["error"] == "NotCentered");

  CHECK_THROWS_AS(experiments::gauss_report("{not json"), Error);
  CHECK_THROWS_AS(experiments::gauss_report(R"({"source": {"mean": [0]}})"), Error);
}
