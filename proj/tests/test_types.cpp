#include "doctest.h"

#include "envelope/types.hpp"
#include "oracles.hpp"

using namespace envelope;

TEST_CASE("SpdMatrix validates on construction") {
  Rng rng(21);
  CHECK_NOTHROW(SpdMatrix(oracles::random_spd(4, rng)));

  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(SpdMatrix{asym}, InputError);

  Matrix indef(2, 2);
  indef << 1.0, 0.0, 0.0, -2.0;
  CHECK_THROWS_AS(SpdMatrix{indef}, NumericalError);

  Matrix near_singular(2, 2);
  near_singular << 1.0, 0.0, 0.0, 1e-14;
  CHECK_THROWS_AS(SpdMatrix{near_singular}, NumericalError);
}

TEST_CASE("PsdMatrix accepts the zero matrix and boundary cases") {
  Rng rng(22);
  CHECK_NOTHROW(PsdMatrix(Matrix::Zero(3, 3)));
  CHECK_NOTHROW(PsdMatrix(oracles::random_psd_rank(4, 2, rng)));

  Matrix neg(2, 2);
  neg << 1.0, 0.0, 0.0, -1e-3;
  CHECK_THROWS_AS(PsdMatrix{neg}, NumericalError);
}

TEST_CASE("MomentPair invariants") {
  Rng rng(23);
  const Matrix m = oracles::random_spd(3, rng);
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(MomentPair(SpdMatrix(m), PsdMatrix(Matrix::Zero(4, 4)), 10), InputError);
  }
  SUBCASE("sample size positive") {
    CHECK_THROWS_AS(MomentPair(SpdMatrix(m), PsdMatrix(Matrix::Zero(3, 3)), 0), InputError);
  }
  SUBCASE("theta must reproduce U") {
    Matrix theta = oracles::gaussian_matrix(3, 2, rng);
    const Matrix u = theta * theta.transpose();
    CHECK_NOTHROW(MomentPair(SpdMatrix(m), PsdMatrix(u), 10, theta));
    CHECK_THROWS_AS(MomentPair(SpdMatrix(m), PsdMatrix(2.0 * u), 10, theta), InputError);
  }
}

TEST_CASE("EnvelopeBasis validates semi-orthogonality") {
  Rng rng(24);
  const Matrix g = oracles::random_orthonormal(5, 2, rng);
  const EnvelopeBasis basis(g);
  CHECK(basis.p() == 5);
  CHECK(basis.k() == 2);
  CHECK((basis.projector() - g * g.transpose()).norm() == 0.0);

  const EnvelopeBasis empty(5);
  CHECK(empty.k() == 0);
  CHECK(empty.projector().norm() == 0.0);

  CHECK_THROWS_AS(EnvelopeBasis(Matrix(2.0 * g)), InputError);
}

TEST_CASE("OneDPath prefix bounds") {
  Rng rng(25);
  OneDPath path{4, oracles::random_orthonormal(4, 2, rng), {-0.5, -0.1}};
  CHECK(path.prefix(0).k() == 0);
  CHECK(path.prefix(2).k() == 2);
  CHECK_THROWS_AS(path.prefix(3), InputError);
}
