// gwdetours: reproduction driver for the subspace-detour experiments.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gwdetours/gwdetours.h"

namespace {

int report_failure(gwd_status status) {
  std::cerr << "gwdetours: " << gwd_last_error() << " (status " << static_cast<int>(status) << ")\n";
  return 1;
}

int emit(gwd_status status, char*& text) {
  if (status != GWD_OK) return report_failure(status);
  std::cout << text;
  gwd_string_free(text);
  text = nullptr;
  return 0;
}

std::string read_all(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("input", "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace-detour Gromov-Wasserstein experiments"};
  app.require_subcommand(1);

  gwd_experiment_options opts;
  gwd_experiment_options_init(&opts);
  std::string out = "out";
  std::vector<double> t_schedule;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", opts.seed, "RNG seed")->capture_default_str();
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--tol", opts.cg.tol, "relative energy decrease that stops conditional gradient")
        ->capture_default_str();
    sub->add_option("--max-iter", opts.cg.max_iter, "conditional-gradient iteration cap")->capture_default_str();
  };

  auto* moons = app.add_subcommand("moons", "moon vs its quarter-turn: full GW and two subspace detours");
  common(moons);
  moons->add_option("--n-points", opts.n_points, "points per moon (default 100)");
  moons->add_option("--noise", opts.noise, "Gaussian noise per coordinate")->capture_default_str();
  moons->add_option("--quantization", opts.quantization, "bin width for projected coordinates")
      ->capture_default_str();

  auto* hw = app.add_subcommand("hw-degeneration", "HW_t couplings along a t schedule vs alternate KR");
  common(hw);
  hw->add_option("--n-points", opts.n_points, "points per Gaussian sample (default 30)");
  hw->add_option("--t-schedule", t_schedule, "strictly decreasing t values, comma separated")->delimiter(',');
  hw->add_option("--quantization", opts.quantization, "grouping width for the alternate KR reference")
      ->capture_default_str();

  std::string src_path, dst_path, gt_path, method = "fiedler", weighting = "unit";
  auto* reg = app.add_subcommand("register", "mesh registration through Fiedler vectors");
  common(reg);
  reg->add_option("source", src_path, "source mesh (.off or ASCII .ply)")->required();
  reg->add_option("target", dst_path, "target mesh (.off or ASCII .ply)")->required();
  reg->add_option("--ground-truth", gt_path, "target index per source vertex, one per line");
  reg->add_option("--method", method, "fiedler or gw-adjacency")
      ->check(CLI::IsMember({"fiedler", "gw-adjacency"}))
      ->capture_default_str();
  reg->add_option("--weighting", weighting, "edge weights: unit, inverse-distance or distance")
      ->check(CLI::IsMember({"unit", "inverse-distance", "distance"}))
      ->capture_default_str();

  auto* fixture = app.add_subcommand("mesh-fixture", "write a synthetic registration pair with ground truth");
  fixture->add_option("--seed", opts.seed, "RNG seed")->capture_default_str();
  fixture->add_option("--out", out, "output directory")->capture_default_str();

  std::string gauss_input = "-";
  auto* gauss = app.add_subcommand("gauss-closed-form", "Gaussian GGW, Monge-Knothe and Monge-Independent forms");
  gauss->alias("gauss");
  gauss->add_option("input", gauss_input, "JSON description, '-' for stdin")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    char* text = nullptr;
    if (moons->parsed()) {
      const gwd_status status = gwd_run_moons(&opts, out.c_str(), &text);
      return emit(status, text);
    }
    if (hw->parsed()) {
      if (!t_schedule.empty()) {
        opts.t_schedule = t_schedule.data();
        opts.t_count = t_schedule.size();
      }
      const gwd_status status = gwd_run_hw_degeneration(&opts, out.c_str(), &text);
      return emit(status, text);
    }
    if (reg->parsed()) {
      opts.method = method == "fiedler" ? GWD_REGISTER_FIEDLER : GWD_REGISTER_GW_ADJACENCY;
      opts.weighting = weighting == "unit"               ? GWD_WEIGHT_UNIT
                       : weighting == "inverse-distance" ? GWD_WEIGHT_INVERSE_DISTANCE
                                                         : GWD_WEIGHT_DISTANCE;
      const auto start = std::chrono::steady_clock::now();
      const gwd_status status = gwd_run_register(src_path.c_str(), dst_path.c_str(),
                                                 gt_path.empty() ? nullptr : gt_path.c_str(), &opts, out.c_str(), &text);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const int rc = emit(status, text);
      if (rc == 0) std::printf("wall_clock_seconds: %.3f\n", seconds);
      return rc;
    }
    if (fixture->parsed()) {
      const gwd_status status = gwd_make_mesh_fixture(opts.seed, out.c_str());
      if (status != GWD_OK) return report_failure(status);
      std::cout << "wrote " << out << "/source.off, target.off, ground_truth.txt\n";
      return 0;
    }
    if (gauss->parsed()) {
      const gwd_status status = gwd_gauss_report(read_all(gauss_input).c_str(), &text);
      return emit(status, text);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
  return 0;
}
