#include "doctest.h"

#include <cmath>

#include "envelope/core.hpp"
#include "oracles.hpp"

using namespace envelope;

namespace {

MomentPair diag_pair() {
  Matrix u(2, 2);
  u << 3.0, 0.0, 0.0, 0.0;
  return MomentPair(SpdMatrix(Matrix(Matrix::Identity(2, 2))), PsdMatrix(u), 100);
}

EnvelopeBasis unit_basis(int p, int axis) {
  Matrix g = Matrix::Zero(p, 1);
  g(axis, 0) = 1.0;
  return EnvelopeBasis(g);
}

MomentPair random_pair(int p, Rng& rng, int q = 0) {
  const Matrix m = oracles::random_spd(p, rng);
  if (q <= 0) {
    return MomentPair(SpdMatrix(m), PsdMatrix(oracles::random_psd_rank(p, std::max(1, p / 2), rng)), 200);
  }
  const Matrix theta = oracles::gaussian_matrix(p, q, rng);
  return MomentPair(SpdMatrix(m), PsdMatrix(Matrix(theta * theta.transpose())), 200, theta);
}

}  // namespace

TEST_CASE("objective_fg closed-form cases") {
  const MomentPair mp = diag_pair();
  CHECK(objective_fg(unit_basis(2, 0), mp) == doctest::Approx(std::log(0.25)).epsilon(1e-12));
  CHECK(objective_fg(unit_basis(2, 1), mp) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(objective_fg(EnvelopeBasis(2), mp) == 0.0);
  // full dimension: log|M| - log|M+U|
  const EnvelopeBasis full{Matrix(Matrix::Identity(2, 2))};
  CHECK(objective_fg(full, mp) == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("objective_fg is rotation invariant") {
  Rng rng(31);
  for (int rep = 0; rep < 25; ++rep) {
    const int p = 4 + static_cast<int>(rng.next_u64() % 4);
    const int k = 1 + static_cast<int>(rng.next_u64() % (p - 1));
    const MomentPair mp = random_pair(p, rng);
    const Matrix g = oracles::random_orthonormal(p, k, rng);
    const Matrix o = oracles::random_orthonormal(k, k, rng);
    const double j1 = objective_fg(EnvelopeBasis(g), mp);
    const double j2 = objective_fg(EnvelopeBasis(Matrix(g * o)), mp);
    CHECK(std::abs(j1 - j2) < 1e-10);
  }
}

TEST_CASE("objective_fg nonnegative when U = 0") {
  Rng rng(32);
  for (int rep = 0; rep < 25; ++rep) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 4);
    const MomentPair mp(SpdMatrix(oracles::random_spd(p, rng)), PsdMatrix(Matrix::Zero(p, p)), 50);
    const int k = 1 + static_cast<int>(rng.next_u64() % p);
    const Matrix g = oracles::random_orthonormal(p, k, rng);
    CHECK(objective_fg(EnvelopeBasis(g), mp) >= -1e-10);
  }
}

TEST_CASE("CHS determinant identity and inequality") {
  Rng rng(33);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 5);
    const int k = 1 + static_cast<int>(rng.next_u64() % (p - 1));
    const Matrix m = oracles::random_spd(p, rng);
    const Matrix g = oracles::random_orthonormal(p, k, rng);
    const Matrix g0 = orthonormal_completion(g, p);
    const double logdet_m = logdet_spd(m);
    const double lhs = logdet_spd(Matrix(g0.transpose() * m * g0)) -
                       logdet_spd(Matrix(g.transpose() * inverse_spd(m) * g));
    CHECK(std::abs(logdet_m - lhs) < 1e-10);
    const double rhs = logdet_spd(Matrix(g0.transpose() * m * g0)) +
                       logdet_spd(Matrix(g.transpose() * m * g));
    CHECK(logdet_m <= rhs + 1e-10);
  }
  // equality when the span is built from eigenvectors
  const Matrix q = oracles::random_orthonormal(5, 5, rng);
  Vector lambda(5);
  lambda << 0.5, 1.0, 1.5, 2.0, 2.5;
  const Matrix m = q * lambda.asDiagonal() * q.transpose();
  const Matrix g = q.leftCols(2);
  const Matrix g0 = orthonormal_completion(g, 5);
  const double sum = logdet_spd(Matrix(g0.transpose() * m * g0)) +
                     logdet_spd(Matrix(g.transpose() * m * g));
  CHECK(std::abs(logdet_spd(m) - sum) < 1e-8);
}

TEST_CASE("objective_1d_step closed form and evenness") {
  Matrix m = Matrix::Identity(2, 2);
  Matrix u(2, 2);
  u << 3.0, 0.0, 0.0, 0.0;
  const Matrix a = inverse_spd(m + u);
  Vector w(2);
  w << 1.0, 0.0;
  CHECK(objective_1d_step(w, m, a) == doctest::Approx(-std::log(4.0)).epsilon(1e-12));

  Rng rng(34);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix mm = oracles::random_spd(4, rng);
    const Matrix uu = oracles::random_psd_rank(4, 2, rng);
    const Matrix aa = inverse_spd(mm + uu);
    Vector v = oracles::gaussian_matrix(4, 1, rng);
    v /= v.norm();
    CHECK(objective_1d_step(v, mm, aa) == objective_1d_step(Vector(-v), mm, aa));
  }
  CHECK_THROWS_AS(objective_1d_step(Vector(Vector::Zero(2)), m, a), InputError);
}

TEST_CASE("objective_1d_step population minimum at the carrying eigenvector") {
  // u = 1, p = 4: the envelope direction is the eigenvector of M carrying U,
  // and min phi = log|M| - log|M+U|.
  Rng rng(35);
  const auto pop = oracles::population_envelope(4, 1, rng);
  const Matrix a = inverse_spd(pop.m + pop.u_mat);
  const Vector v = pop.gamma.col(0);
  const double at_carrier = objective_1d_step(v, pop.m, a);
  const double floor = oracles::logdet_direct(pop.m) - oracles::logdet_direct(pop.m + pop.u_mat);
  CHECK(at_carrier == doctest::Approx(floor).epsilon(1e-10));
  // no random direction does better
  for (int rep = 0; rep < 2000; ++rep) {
    Vector w = oracles::gaussian_matrix(4, 1, rng);
    w /= w.norm();
    CHECK(objective_1d_step(w, pop.m, a) >= floor - 1e-10);
  }
}

TEST_CASE("objective_1d_gradient matches finite differences") {
  Rng rng(36);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix m = oracles::random_spd(5, rng);
    const Matrix u = oracles::random_psd_rank(5, 2, rng);
    const Matrix a = inverse_spd(m + u);
    Vector w = oracles::gaussian_matrix(5, 1, rng);
    w /= w.norm();
    const Vector analytic = objective_1d_gradient(w, m, a);
    const Vector numeric = oracles::fd_gradient(
        [&](const Vector& v) { return std::log(v.dot(m * v)) + std::log(v.dot(a * v)); }, w);
    CHECK((analytic - numeric).norm() / numeric.norm() < 1e-5);
  }
}

TEST_CASE("objective_1d_gradient stationarity and identity case") {
  Rng rng(37);
  // with U = 0 every eigenvector of M is stationary on the sphere
  const Matrix q = oracles::random_orthonormal(4, 4, rng);
  Vector lambda(4);
  lambda << 0.5, 1.0, 2.0, 3.0;
  const Matrix m = q * lambda.asDiagonal() * q.transpose();
  const Matrix a = inverse_spd(m);
  for (int j = 0; j < 4; ++j) {
    const Vector w = q.col(j);
    const Vector g = objective_1d_gradient(w, m, a);
    const Vector tangential = g - w.dot(g) * w;
    CHECK(tangential.norm() < 1e-8);
  }
  // M = A = I: gradient is 4w everywhere, tangential part zero
  const Matrix eye = Matrix::Identity(3, 3);
  Vector w = oracles::gaussian_matrix(3, 1, rng);
  w /= w.norm();
  const Vector g = objective_1d_gradient(w, eye, eye);
  CHECK((g - 4.0 * w).norm() < 1e-12);
  CHECK((g - w.dot(g) * w).norm() < 1e-12);
}

TEST_CASE("deflate conventions and interlacing") {
  Rng rng(38);
  const MomentPair mp = diag_pair();
  SUBCASE("k = 0 leaves the pair unchanged") {
    const Deflation d = deflate(mp, EnvelopeBasis(2));
    CHECK((d.m_k.entries() - mp.m_hat()).norm() == 0.0);
    CHECK((d.u_k.entries() - mp.u_hat()).norm() == 0.0);
    CHECK(d.g0.k() == 2);
  }
  SUBCASE("coordinate case") {
    const Deflation d = deflate(mp, unit_basis(2, 0));
    CHECK(d.m_k.dim() == 1);
    CHECK(d.m_k.entries()(0, 0) == doctest::Approx(1.0));
    CHECK(d.u_k.entries()(0, 0) == doctest::Approx(0.0));
  }
  SUBCASE("full basis rejected") {
    CHECK_THROWS_AS(deflate(mp, EnvelopeBasis(Matrix(Matrix::Identity(2, 2)))), InputError);
  }
  SUBCASE("random p=6 k=3: orthogonality and Cauchy interlacing") {
    const MomentPair big = random_pair(6, rng);
    const Matrix g = oracles::random_orthonormal(6, 3, rng);
    const Deflation d = deflate(big, EnvelopeBasis(g));
    CHECK((d.g0.gamma().transpose() * g).norm() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> eig_full(big.m_hat());
    Eigen::SelfAdjointEigenSolver<Matrix> eig_sub(d.m_k.entries());
    // lambda_i <= mu_i <= lambda_{i+k} for the compression to a 3-dim subspace
    for (int i = 0; i < 3; ++i) {
      CHECK(eig_sub.eigenvalues()(i) >= eig_full.eigenvalues()(i) - 1e-10);
      CHECK(eig_sub.eigenvalues()(i) <= eig_full.eigenvalues()(i + 3) + 1e-10);
    }
  }
}

TEST_CASE("quasi_loglik plug-in values") {
  Rng rng(39);
  const int p = 4, q = 2;
  const MomentPair mp = random_pair(p, rng, q);
  const Matrix& theta_hat = *mp.theta_hat();
  CHECK(quasi_loglik(SpdMatrix(mp.m_hat()), theta_hat, mp) ==
        doctest::Approx(logdet_spd(mp.m_hat()) + p).epsilon(1e-12));
  CHECK(quasi_loglik(SpdMatrix(Matrix(Matrix::Identity(p, p))), theta_hat, mp) ==
        doctest::Approx(mp.m_hat().trace()).epsilon(1e-12));
}

TEST_CASE("quasi-likelihood at the plug-ins reproduces the objective") {
  // ln at the partial minimizers equals J(G) + log|M+U| + p; verified with
  // the plug-in matrix built directly from its definition.
  Rng rng(40);
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 5);
    const int k = 1 + static_cast<int>(rng.next_u64() % (p - 1));
    const int q = rng.bernoulli(0.5) ? 1 : 3;
    const MomentPair mp = random_pair(p, rng, q);
    const Matrix g = oracles::random_orthonormal(p, k, rng);
    const Matrix g0 = orthonormal_completion(g, p);
    const EnvelopeBasis basis(g);

    const Matrix m_plug = g * (g.transpose() * mp.m_hat() * g) * g.transpose() +
                          g0 * (g0.transpose() * mp.m_plus_u() * g0) * g0.transpose();
    const Matrix theta_env = basis.projector() * (*mp.theta_hat());
    const double ln = quasi_loglik(SpdMatrix(symmetrize(m_plug)), theta_env, mp);
    const double expected = objective_fg(basis, mp) + logdet_spd(mp.m_plus_u()) + p;
    CHECK(std::abs(ln - expected) < 1e-8);
    CHECK((quasi_plugin_matrix(basis, mp) - symmetrize(m_plug)).norm() < 1e-10);
  }
}

TEST_CASE("plug-ins are not beaten by nearby feasible parameters") {
  Rng rng(41);
  const int p = 5, k = 2, q = 1;
  const MomentPair mp = random_pair(p, rng, q);
  const Matrix g = oracles::random_orthonormal(p, k, rng);
  const Matrix g0 = orthonormal_completion(g, p);
  const EnvelopeBasis basis(g);
  const double at_plugin =
      quasi_loglik(SpdMatrix(quasi_plugin_matrix(basis, mp)), Matrix(basis.projector() * (*mp.theta_hat())), mp);
  const Matrix omega = g.transpose() * mp.m_hat() * g;
  const Matrix omega0 = g0.transpose() * mp.m_plus_u() * g0;
  const Matrix eta = g.transpose() * (*mp.theta_hat());
  for (int rep = 0; rep < 50; ++rep) {
    const double eps = 0.05;
    const Matrix d_omega = eps * oracles::random_psd_rank(k, k, rng);
    const Matrix d_omega0 = eps * oracles::random_psd_rank(p - k, p - k, rng);
    const Matrix d_eta = eps * oracles::gaussian_matrix(k, q, rng);
    const Matrix m_pert = symmetrize(g * (omega + d_omega) * g.transpose() +
                                     g0 * (omega0 + d_omega0) * g0.transpose());
    const Matrix theta_pert = g * (eta + d_eta);
    CHECK(quasi_loglik(SpdMatrix(m_pert), theta_pert, mp) >= at_plugin - 1e-10);
  }
}

TEST_CASE("envelope_fit_from_basis boundary dimensions") {
  Rng rng(42);
  const int p = 4, q = 2;
  const MomentPair mp = random_pair(p, rng, q);
  SUBCASE("k = p reproduces the standard estimator exactly") {
    const EnvelopeFit fit = envelope_fit_from_basis(EnvelopeBasis(Matrix(Matrix::Identity(p, p))), mp);
    CHECK((*fit.theta_env - *mp.theta_hat()).norm() == 0.0);
    CHECK((fit.m_env - mp.m_hat()).norm() == 0.0);
  }
  SUBCASE("k = 0 gives zero coefficients and m_env = M") {
    const EnvelopeFit fit = envelope_fit_from_basis(EnvelopeBasis(p), mp);
    CHECK(fit.theta_env->norm() == 0.0);
    CHECK((fit.m_env - mp.m_hat()).norm() == 0.0);
    CHECK(fit.objective == 0.0);
    CHECK(fit.omega0_hat.rows() == p);
  }
}

TEST_CASE("envelope_fit_from_basis invariants on random instances") {
  Rng rng(43);
  for (int rep = 0; rep < 25; ++rep) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 4);
    const int k = 1 + static_cast<int>(rng.next_u64() % (p - 1));
    const MomentPair mp = random_pair(p, rng, 1);
    const EnvelopeBasis basis{oracles::random_orthonormal(p, k, rng)};
    const EnvelopeFit fit = envelope_fit_from_basis(basis, mp);

    CHECK((*fit.theta_env - basis.gamma() * (*fit.eta_hat)).norm() == 0.0);
    const Matrix proj = basis.projector();
    const Matrix q_proj = Matrix::Identity(p, p) - proj;
    CHECK((fit.m_env - (proj * mp.m_hat() * proj + q_proj * mp.m_hat() * q_proj)).norm() < 1e-10);
    CHECK((proj * proj - proj).norm() < 1e-10);
    CHECK((*fit.theta_env - proj * (*mp.theta_hat())).norm() < 1e-12);
    CHECK(fit.objective == doctest::Approx(objective_fg(basis, mp)));

    // Lemma-style identity through the plug-in matrix reconstructed from the
    // fitted omega blocks.
    const Matrix g0 = orthonormal_completion(basis.gamma(), p);
    const Matrix m_plug = symmetrize(basis.gamma() * fit.omega_hat * basis.gamma().transpose() +
                                     g0 * fit.omega0_hat * g0.transpose());
    const double ln = quasi_loglik(SpdMatrix(m_plug), *fit.theta_env, mp);
    CHECK(std::abs(ln - (fit.objective + logdet_spd(mp.m_plus_u()) + p)) < 1e-8);
  }
}

TEST_CASE("fit without a standard estimator omits theta fields") {
  Rng rng(44);
  const MomentPair mp = random_pair(5, rng);
  const EnvelopeFit fit = envelope_fit_from_basis(EnvelopeBasis{oracles::random_orthonormal(5, 2, rng)}, mp);
  CHECK(!fit.eta_hat);
  CHECK(!fit.theta_env);
  CHECK(fit.omega_hat.rows() == 2);
}

TEST_CASE("subspace_distance") {
  Rng rng(45);
  const Matrix g = oracles::random_orthonormal(4, 2, rng);
  const EnvelopeBasis a(g);
  CHECK(subspace_distance(a, a) == 0.0);

  Matrix e1 = Matrix::Zero(2, 1), e2 = Matrix::Zero(2, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  CHECK(subspace_distance(EnvelopeBasis(e1), EnvelopeBasis(e2)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const Matrix o = oracles::random_orthonormal(2, 2, rng);
  CHECK(subspace_distance(a, EnvelopeBasis(Matrix(g * o))) < 1e-12);
}
