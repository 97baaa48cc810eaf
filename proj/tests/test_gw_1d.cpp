#include "doctest.h"
#include "gwdetours/gw_1d.hpp"
#include "oracles.hpp"

using namespace gwd;

namespace {

double inner_energy(const Matrix& x, const Matrix& y, const Matrix& g) {
  return oracle::gw_energy(x * x.transpose(), y * y.transpose(), g);
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("identical measures pick Ascending with zero cost") {
  const auto mu = make_uniform_measure(column({1, 2, 3}));
  const auto r = inner_gw_1d(mu, mu);
  CHECK(r.direction == Direction::Ascending);
  CHECK(r.cost == doctest::Approx(0.0));
}

TEST_CASE("negated support prefers Descending") {
  const Matrix x = column({1, 2}), y = column({-2, -1});
  const auto mu = make_uniform_measure(x), nu = make_uniform_measure(y);
  const auto r = inner_gw_1d(mu, nu);
  CHECK(r.direction == Direction::Descending);
  const double asc = inner_energy(x, y, monotone_coupling(mu, nu, Direction::Ascending).matrix());
  const double desc = inner_energy(x, y, monotone_coupling(mu, nu, Direction::Descending).matrix());
  CHECK(desc < asc);
  CHECK(std::abs(r.cost - std::min(asc, desc)) <= 1e-12);
  CHECK(r.coupling.matrix()(0, 1) == 0.5);  // 1 -> -1
}

TEST_CASE("uniform instances match the exhaustive permutation minimum") {
  Rng rng(31);
  for (int rep = 0; rep < 80; ++rep) {
    const int n = 1 + static_cast<int>(rng.below(7));
    const Matrix x = oracle::gaussian_matrix(n, 1, rng), y = oracle::gaussian_matrix(n, 1, rng);
    const auto r = inner_gw_1d(make_uniform_measure(x), make_uniform_measure(y));
    const auto best = oracle::min_over_permutations(n, [&](const Matrix& g) { return inner_energy(x, y, g); });
    CHECK(std::abs(r.cost - best.value) <= 1e-9);
    CHECK(std::abs(r.cost - inner_energy(x, y, r.coupling.matrix())) <= 1e-10);
    CHECK(r.cost >= 0.0);
  }
}

TEST_CASE("sign flip keeps the cost and swaps the direction") {
  Rng rng(37);
  for (int rep = 0; rep < 30; ++rep) {
    const auto n = 2 + static_cast<Eigen::Index>(rng.below(10));
    const Matrix x = oracle::gaussian_matrix(n, 1, rng), y = oracle::gaussian_matrix(n + 1, 1, rng);
    const auto a = inner_gw_1d(make_uniform_measure(x), make_uniform_measure(y));
    const auto b = inner_gw_1d(make_uniform_measure(-x), make_uniform_measure(y));
    CHECK(std::abs(a.cost - b.cost) <= 1e-10 * std::max(1.0, a.cost));
    const auto mu = make_uniform_measure(x), nu = make_uniform_measure(y);
    const double gap = std::abs(inner_energy(x, y, monotone_coupling(mu, nu, Direction::Ascending).matrix()) -
                                inner_energy(x, y, monotone_coupling(mu, nu, Direction::Descending).matrix()));
    if (gap > 1e-8) CHECK(a.direction != b.direction);
  }
}

TEST_CASE("returned cost beats random couplings") {
  Rng rng(41);
  for (int rep = 0; rep < 5; ++rep) {
    const auto n = 2 + static_cast<Eigen::Index>(rng.below(8));
    const auto m = 2 + static_cast<Eigen::Index>(rng.below(8));
    const Matrix x = oracle::gaussian_matrix(n, 1, rng), y = oracle::gaussian_matrix(m, 1, rng);
    const Vector p = oracle::random_simplex(n, rng), q = oracle::random_simplex(m, rng);
    const auto r = inner_gw_1d(make_discrete_measure(x, p), make_discrete_measure(y, q));
    CHECK(r.coupling.marginal_residual() <= 1e-9);
    for (int k = 0; k < 200; ++k) CHECK(r.cost <= inner_energy(x, y, oracle::random_coupling(p, q, rng)) + 1e-12);
  }
}

TEST_CASE("rejects multi-dimensional input") {
  const auto mu = make_uniform_measure(Matrix::Zero(2, 2));
  CHECK_THROWS_AS(inner_gw_1d(mu, mu), Error);
}
