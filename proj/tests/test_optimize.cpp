#include "doctest.h"

#include <cmath>

#include "envelope/core.hpp"
#include "envelope/optimize.hpp"
#include "oracles.hpp"

using namespace envelope;

namespace {

OptimizerSettings quick_settings(std::uint64_t seed, int multistarts = 10) {
  OptimizerSettings s;
  s.seed = seed;
  s.num_multistarts = multistarts;
  return s;
}

}  // namespace

TEST_CASE("solve_sphere trivial dimensions") {
  Matrix m(1, 1), u(1, 1);
  m << 2.0;
  u << 6.0;
  const SphereSolution sol = solve_sphere(SpdMatrix(m), PsdMatrix(u), quick_settings(1));
  CHECK(sol.w(0) == 1.0);
  CHECK(sol.value == doctest::Approx(std::log(2.0) - std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("solve_sphere diagonal case") {
  Matrix u(2, 2);
  u << 3.0, 0.0, 0.0, 0.0;
  const SphereSolution sol =
      solve_sphere(SpdMatrix(Matrix(Matrix::Identity(2, 2))), PsdMatrix(u), quick_settings(2));
  CHECK(std::abs(sol.w(0)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.value == doctest::Approx(-std::log(4.0)).epsilon(1e-10));
}

TEST_CASE("solve_sphere beats a quasi-uniform grid") {
  Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix m = oracles::random_spd(4, rng);
    const Matrix u = oracles::random_psd_rank(4, 2, rng);
    std::vector<Vector> grid;
    grid.reserve(100000);
    Rng grid_rng(1000 + rep);
    for (int i = 0; i < 100000; ++i) {
      Vector w = oracles::gaussian_matrix(4, 1, grid_rng);
      grid.push_back(w / w.norm());
    }
    const double grid_min = oracles::grid_min_phi(grid, m, m + u);
    const SphereSolution sol = solve_sphere(SpdMatrix(m), PsdMatrix(u), quick_settings(30 + rep));
    CHECK(sol.value <= grid_min + 1e-4);
    CHECK(sol.w.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("solve_sphere is deterministic") {
  Rng rng(4);
  const Matrix m = oracles::random_spd(6, rng);
  const Matrix u = oracles::random_psd_rank(6, 3, rng);
  const SphereSolution a = solve_sphere(SpdMatrix(m), PsdMatrix(u), quick_settings(77));
  const SphereSolution b = solve_sphere(SpdMatrix(m), PsdMatrix(u), quick_settings(77));
  CHECK((a.w - b.w).norm() == 0.0);
  CHECK(a.value == b.value);
}

TEST_CASE("solve_grassmann k=1 matches a dense Fibonacci grid on S^2") {
  Rng rng(5);
  const Matrix m = oracles::random_spd(3, rng, 0.5, 3.0);
  const Matrix u = oracles::random_psd_rank(3, 1, rng);
  const MomentPair mp(SpdMatrix(m), PsdMatrix(u), 100);
  const auto grid = oracles::fibonacci_sphere(1000000);
  const double grid_min = oracles::grid_min_phi(grid, m, m + u);
  const EnvelopeBasis basis = solve_grassmann(mp, 1, std::nullopt, quick_settings(6));
  CHECK(std::abs(objective_fg(basis, mp) - grid_min) < 1e-4);
}

TEST_CASE("solve_grassmann k=1 agrees with solve_sphere") {
  Rng rng(7);
  const Matrix m = oracles::random_spd(3, rng);
  const Matrix u = oracles::random_psd_rank(3, 1, rng);
  const MomentPair mp(SpdMatrix(m), PsdMatrix(u), 100);
  const SphereSolution sphere = solve_sphere(SpdMatrix(m), PsdMatrix(u), quick_settings(8));
  const EnvelopeBasis basis = solve_grassmann(mp, 1, std::nullopt, quick_settings(8));
  CHECK(std::abs(objective_fg(basis, mp) - sphere.value) < 1e-6);
}

TEST_CASE("solve_grassmann recovers a structured population envelope") {
  // Population with Omega eigenvalues 1..u and a spread Omega0 spectrum in
  // the complement; the envelope equals the carrying eigenspace.
  Rng rng(9);
  const int p = 6, u_dim = 2;
  const Matrix gamma = oracles::random_orthonormal(p, p, rng);
  const Matrix g = gamma.leftCols(u_dim);
  const Matrix g0 = gamma.rightCols(p - u_dim);
  Vector omega_eigs(u_dim), omega0_eigs(p - u_dim);
  omega_eigs << 1.0, 2.0;
  for (int i = 0; i < p - u_dim; ++i) omega0_eigs(i) = std::exp(-4.0 + i * 7.0 / (p - u_dim - 1));
  const Matrix phi = oracles::random_psd_rank(u_dim, u_dim, rng) + Matrix::Identity(u_dim, u_dim);
  const Matrix m = g * omega_eigs.asDiagonal() * g.transpose() +
                   g0 * omega0_eigs.asDiagonal() * g0.transpose();
  const Matrix u_mat = g * phi * g.transpose();
  const MomentPair mp(SpdMatrix(symmetrize(m)), PsdMatrix(symmetrize(u_mat)), 10000);

  const EnvelopeBasis est = solve_grassmann(mp, u_dim, std::nullopt, quick_settings(10));
  CHECK(subspace_distance(est, EnvelopeBasis(Matrix(g))) < 1e-5);

  // monotone improvement over the warm start and retraction validity
  const OneDRaw warm = one_d_path_raw(mp, u_dim, quick_settings(10));
  const EnvelopeBasis warm_basis{Matrix(warm.directions)};
  CHECK(objective_fg(est, mp) <= objective_fg(warm_basis, mp) + 1e-12);
  CHECK((est.gamma().transpose() * est.gamma() - Matrix::Identity(u_dim, u_dim)).norm() < 1e-10);
}

TEST_CASE("Riemannian gradient matches finite differences along tangents") {
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const int p = 5, k = 2;
    const Matrix m = oracles::random_spd(p, rng);
    const Matrix u = oracles::random_psd_rank(p, 2, rng);
    const Matrix a = inverse_spd(m + u);
    const Matrix g = oracles::random_orthonormal(p, k, rng);
    const MomentPair mp(SpdMatrix(m), PsdMatrix(u), 50);

    const Matrix mg = m * g;
    const Matrix ag = a * g;
    Matrix grad = 2.0 * mg * inverse_spd(Matrix(g.transpose() * mg)) +
                  2.0 * ag * inverse_spd(Matrix(g.transpose() * ag));
    grad -= g * (g.transpose() * grad);

    for (int dir = 0; dir < 20; ++dir) {
      Matrix delta = oracles::gaussian_matrix(p, k, rng);
      delta -= g * (g.transpose() * delta);  // tangent at g
      delta /= delta.norm();
      const double h = 1e-6;
      auto value_at = [&](double t) {
        return objective_fg(EnvelopeBasis(thin_qr_orthonormal(g + t * delta)), mp);
      };
      const double fd = (value_at(h) - value_at(-h)) / (2.0 * h);
      const double analytic = (grad.array() * delta.array()).sum();
      CHECK(std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)) < 1e-5);
    }
  }
}

TEST_CASE("population floor: J flattens at the envelope dimension") {
  Rng rng(12);
  const int p = 5, u_dim = 2;
  const auto pop = oracles::population_envelope(p, u_dim, rng);
  const MomentPair mp(SpdMatrix(pop.m), PsdMatrix(pop.u_mat), 1000);
  const double floor = oracles::logdet_direct(pop.m) - oracles::logdet_direct(pop.m + pop.u_mat);
  for (int k = 1; k <= p - 1; ++k) {
    const EnvelopeBasis basis = solve_grassmann(mp, k, std::nullopt, quick_settings(100 + k, 12));
    const double value = objective_fg(basis, mp);
    if (k < u_dim) {
      CHECK(value > floor + 1e-6);
    } else {
      CHECK(value == doctest::Approx(floor).epsilon(1e-6));
    }
  }
}

TEST_CASE("one_d_path_raw produces orthonormal nested directions") {
  Rng rng(13);
  const int p = 7;
  const Matrix m = oracles::random_spd(p, rng);
  const Matrix u = oracles::random_psd_rank(p, 3, rng);
  const MomentPair mp(SpdMatrix(m), PsdMatrix(u), 300);
  const OneDRaw path = one_d_path_raw(mp, p - 1, quick_settings(14, 4));
  CHECK((path.directions.transpose() * path.directions - Matrix::Identity(p - 1, p - 1)).norm() <
        1e-8);
  CHECK(static_cast<int>(path.values.size()) == p - 1);
}

TEST_CASE("solver input validation") {
  Rng rng(15);
  const MomentPair mp(SpdMatrix(oracles::random_spd(4, rng)), PsdMatrix(Matrix::Zero(4, 4)), 10);
  CHECK_THROWS_AS(solve_grassmann(mp, 0, std::nullopt, quick_settings(1)), InputError);
  CHECK_THROWS_AS(solve_grassmann(mp, 4, std::nullopt, quick_settings(1)), InputError);
  OptimizerSettings bad;
  bad.num_multistarts = 0;
  CHECK_THROWS_AS(solve_grassmann(mp, 2, std::nullopt, bad), InputError);
}
