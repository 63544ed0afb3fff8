#include "envelope/linalg.hpp"

#include <cmath>

#include "envelope/types.hpp"

namespace envelope {

double logdet_spd(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularityError("Cholesky factorization failed: matrix is numerically singular or indefinite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Matrix inverse_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularityError("Cholesky factorization failed: matrix is numerically singular or indefinite");
  }
  return symmetrize(llt.solve(Matrix::Identity(a.rows(), a.cols())));
}

Matrix psd_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a));
  Vector lambda = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

Matrix thin_qr_orthonormal(const Matrix& a) {
  const auto rows = a.rows();
  const auto cols = a.cols();
  if (cols == 0) return Matrix(rows, 0);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix orthonormal_completion(const Matrix& gamma, int p) {
  const int k = static_cast<int>(gamma.cols());
  if (k == 0) return Matrix::Identity(p, p);
  if (k == p) return Matrix(p, 0);
  Eigen::HouseholderQR<Matrix> qr(gamma);
  Matrix q = qr.householderQ() * Matrix::Identity(p, p);
  return q.rightCols(p - k);
}

Matrix unit_vector_completion(const Vector& w) {
  const int d = static_cast<int>(w.size());
  Eigen::HouseholderQR<Matrix> qr(w);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return q.rightCols(d - 1);
}

}  // namespace envelope
