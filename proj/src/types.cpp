#include "envelope/types.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace envelope {

namespace {

constexpr double kSymmetryRelTol = 1e-12;
constexpr double kMaxConditionNumber = 1e12;
constexpr double kPsdRelTol = 1e-10;
constexpr double kSemiOrthTol = 1e-10;
constexpr double kThetaRelTol = 1e-10;

void check_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw InputError(std::string(what) + ": matrix must be square and non-empty");
  }
}

void check_symmetric(const Matrix& a, const char* what) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryRelTol * scale) {
    throw InputError(std::string(what) + ": matrix is not symmetric");
  }
}

}  // namespace

SpdMatrix::SpdMatrix(Matrix entries) {
  check_square(entries, "SpdMatrix");
  check_symmetric(entries, "SpdMatrix");
  entries_ = symmetrize(entries);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(entries_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0) {
    throw NumericalError("SpdMatrix: matrix is not positive definite");
  }
  if (hi / lo > kMaxConditionNumber) {
    throw NumericalError("SpdMatrix: matrix is near-singular (condition number above 1e12)");
  }
}

PsdMatrix::PsdMatrix(Matrix entries) {
  check_square(entries, "PsdMatrix");
  check_symmetric(entries, "PsdMatrix");
  entries_ = symmetrize(entries);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(entries_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  // Absolute slack keeps deflations of a PSD matrix valid when the
  // compressed block is pure rounding noise.
  const double tol = kPsdRelTol * std::max(hi, 0.0) +
                     1e-12 * std::max(1.0, entries_.cwiseAbs().maxCoeff());
  if (lo < -tol) {
    throw NumericalError("PsdMatrix: matrix has a negative eigenvalue");
  }
}

MomentPair::MomentPair(SpdMatrix m_hat, PsdMatrix u_hat, int n)
    : m_hat_(std::move(m_hat)), u_hat_(std::move(u_hat)), n_(n) {
  if (m_hat_.dim() != u_hat_.dim()) {
    throw InputError("MomentPair: M and U dimensions differ");
  }
  if (n_ < 1) throw InputError("MomentPair: sample size must be positive");
}

MomentPair::MomentPair(SpdMatrix m_hat, PsdMatrix u_hat, int n, Matrix theta_hat)
    : MomentPair(std::move(m_hat), std::move(u_hat), n) {
  if (theta_hat.rows() != dim() || theta_hat.cols() < 1) {
    throw InputError("MomentPair: theta_hat must be p x q with q >= 1");
  }
  const Matrix ttt = theta_hat * theta_hat.transpose();
  const double unorm = u_hat_.entries().norm();
  const double err = (u_hat_.entries() - ttt).norm();
  if (err > kThetaRelTol * std::max(unorm, 1e-300) && err > 1e-12) {
    throw InputError("MomentPair: U differs from theta_hat * theta_hat'");
  }
  theta_hat_ = std::move(theta_hat);
}

EnvelopeBasis::EnvelopeBasis(int p) : p_(p), gamma_(p, 0) {
  if (p < 1) throw InputError("EnvelopeBasis: ambient dimension must be positive");
}

EnvelopeBasis::EnvelopeBasis(Matrix gamma) : p_(static_cast<int>(gamma.rows())) {
  if (p_ < 1 || gamma.cols() > gamma.rows()) {
    throw InputError("EnvelopeBasis: need p >= 1 and k <= p");
  }
  const int k = static_cast<int>(gamma.cols());
  if (k > 0) {
    const double err = (gamma.transpose() * gamma - Matrix::Identity(k, k)).norm();
    if (err > kSemiOrthTol) {
      throw InputError("EnvelopeBasis: columns are not orthonormal");
    }
  }
  gamma_ = std::move(gamma);
}

EnvelopeBasis OneDPath::prefix(int k) const {
  if (k < 0 || k > steps()) throw InputError("OneDPath::prefix: k out of range");
  if (k == 0) return EnvelopeBasis(p);
  return EnvelopeBasis(directions.leftCols(k));
}

}  // namespace envelope
