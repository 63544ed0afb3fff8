#pragma once

#include <Eigen/Dense>

namespace envelope {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Log-determinant of a symmetric positive definite matrix via Cholesky.
// Throws SingularityError when the factorization fails.
double logdet_spd(const Matrix& a);

// Inverse of a symmetric positive definite matrix via Cholesky solve.
Matrix inverse_spd(const Matrix& a);

// Symmetric square root of a positive semidefinite matrix.
Matrix psd_sqrt(const Matrix& a);

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// Thin QR orthonormalization with the sign convention diag(R) > 0, making
// the factor unique and the map continuous in the input.
Matrix thin_qr_orthonormal(const Matrix& a);

// Orthonormal completion: columns spanning the orthogonal complement of
// span(gamma) in R^p. gamma must have orthonormal columns. For k = 0 the
// identity basis is returned.
Matrix orthonormal_completion(const Matrix& gamma, int p);

// Householder completion of a single unit vector: returns a d x (d-1)
// orthonormal matrix whose columns are orthogonal to w.
Matrix unit_vector_completion(const Vector& w);

}  // namespace envelope
