#include "doctest.h"
#include "gwdetours/gw_1d.hpp"
#include "gwdetours/hadamard.hpp"
#include "oracles.hpp"

using namespace gwd;

namespace {

HWInstance random_instance(Rng& rng, Eigen::Index n, Eigen::Index m, Eigen::Index d) {
  return HWInstance(oracle::gaussian_matrix(n, d, rng), oracle::gaussian_matrix(m, d, rng),
                    oracle::random_simplex(n, rng), oracle::random_simplex(m, rng));
}

}  // namespace

TEST_CASE("identical point sets under the identity coupling") {
  Rng rng(1);
  const Matrix x = oracle::gaussian_matrix(5, 3, rng);
  const Vector p = Vector::Constant(5, 0.2);
  const HWInstance inst(x, x, p, p);
  CHECK(std::abs(hw_energy(inst, Matrix(Matrix::Identity(5, 5) / 5.0))) <= 1e-14);
}

TEST_CASE("d = 1 reduces to the inner-product GW energy") {
  Rng rng(2);
  const auto inst = random_instance(rng, 6, 4, 1);
  const Matrix g = oracle::random_coupling(inst.p(), inst.q(), rng);
  const double inner = oracle::gw_energy(inst.x() * inst.x().transpose(), inst.y() * inst.y().transpose(), g);
  CHECK(std::abs(hw_energy(inst, g) - inner) <= 1e-10);
}

TEST_CASE("contraction equals the quadruple sum, plain and weighted") {
  Rng rng(3);
  for (int rep = 0; rep < 40; ++rep) {
    const auto n = 1 + static_cast<Eigen::Index>(rng.below(8));
    const auto m = 1 + static_cast<Eigen::Index>(rng.below(8));
    const auto d = 1 + static_cast<Eigen::Index>(rng.below(4));
    auto inst = random_instance(rng, n, m, d);
    if (rep % 2) inst = inst.with_weights(degenerate_weights(d, rng.uniform(0.01, 1.0)));
    const Matrix g = oracle::random_coupling(inst.p(), inst.q(), rng);
    const Matrix fast = hw_tensor_product(inst, g);
    const Matrix slow = oracle::hw_tensor(inst.x(), inst.y(), inst.lambda_weights(), g);
    CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(hw_energy(inst, g) - oracle::hw_energy(inst.x(), inst.y(), inst.lambda_weights(), g)) <= 1e-10);
    CHECK(std::abs((fast.array() * g.array()).sum() - hw_energy(inst, g)) <= 1e-10);
  }
}

TEST_CASE("tensor product edge cases") {
  const HWInstance zero(Matrix::Zero(3, 2), Matrix::Zero(4, 2), Vector::Constant(3, 1.0 / 3), Vector::Constant(4, 0.25));
  CHECK(hw_tensor_product(zero, Matrix::Constant(3, 4, 1.0 / 12)).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(4);
  Matrix y = oracle::gaussian_matrix(4, 2, rng);
  y.row(3) = y.row(1);
  const HWInstance dup(oracle::gaussian_matrix(3, 2, rng), y, Vector::Constant(3, 1.0 / 3), Vector::Constant(4, 0.25));
  const Matrix t = hw_tensor_product(dup, Matrix::Constant(3, 4, 1.0 / 12));
  CHECK((t.col(1) - t.col(3)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("axis reflections leave the energy unchanged") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = 1 + static_cast<Eigen::Index>(rng.below(4));
    const auto inst = random_instance(rng, 6, 5, d);
    Matrix flipped = inst.x();
    flipped.col(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d)))) *= -1.0;
    const HWInstance other(flipped, inst.y(), inst.p(), inst.q());
    const Matrix g = oracle::random_coupling(inst.p(), inst.q(), rng);
    CHECK(std::abs(hw_energy(inst, g) - hw_energy(other, g)) <= 1e-10);
  }
}

TEST_CASE("instance validation and weights") {
  CHECK_THROWS_AS(HWInstance(Matrix::Zero(2, 2), Matrix::Zero(2, 3), Vector::Constant(2, .5), Vector::Constant(2, .5)),
                  Error);
  CHECK_THROWS_AS(HWInstance(Matrix::Zero(2, 2), Matrix::Zero(2, 2), Vector::Constant(2, .5), Vector::Constant(2, .5),
                             Vector::Constant(2, 0.5)),
                  Error);
  const Vector w = degenerate_weights(3, 0.1);
  CHECK(w(0) == 1.0);
  CHECK(w(2) == doctest::Approx(0.01));
  CHECK(degenerate_weights(40, 1e-3)(39) == 1e-18);
}

TEST_CASE("same measure solves to zero energy") {
  Rng rng(6);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix x = oracle::gaussian_matrix(8, 2, rng);
    const Vector p = Vector::Constant(8, 0.125);
    const auto r = solve_hw(HWInstance(x, x, p, p));
    CHECK(r.energy_trace.back() <= 1e-10);
    CHECK(r.coupling.marginal_residual() <= 1e-9);
  }
}

TEST_CASE("d = 1 solves reach the closed-form 1D cost") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto n = 2 + static_cast<Eigen::Index>(rng.below(12));
    const auto m = 2 + static_cast<Eigen::Index>(rng.below(12));
    const Matrix x = oracle::gaussian_matrix(n, 1, rng).cwiseAbs(), y = oracle::gaussian_matrix(m, 1, rng).cwiseAbs();
    const Vector p = oracle::random_simplex(n, rng), q = oracle::random_simplex(m, rng);
    const auto r = solve_hw(HWInstance(x, y, p, q));
    const auto closed = inner_gw_1d(make_discrete_measure(x, p), make_discrete_measure(y, q));
    CHECK(std::abs(r.energy_trace.back() - closed.cost) <= 1e-8);
    CHECK(oracle::nonincreasing(r.energy_trace, 1e-12));
  }
}

TEST_CASE("t schedule") {
  Rng rng(8);
  const auto inst = random_instance(rng, 7, 7, 2);
  const auto one = hw_t_schedule(inst, {1.0});
  const auto plain = solve_hw(inst);
  CHECK(one.size() == 1);
  CHECK((one[0].coupling.matrix() - plain.coupling.matrix()).cwiseAbs().maxCoeff() == 0.0);

  const auto line = random_instance(rng, 6, 6, 1);
  const auto sched = hw_t_schedule(line, {1.0, 0.1, 0.01});
  for (const auto& r : sched) CHECK((r.coupling.matrix() - sched[0].coupling.matrix()).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(hw_t_schedule(inst, {0.1, 0.1}), Error);
  CHECK_THROWS_AS(hw_t_schedule(inst, {1.0, -1.0}), Error);
}
