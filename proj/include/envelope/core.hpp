#pragma once

#include "envelope/types.hpp"

namespace envelope {

// Moment-based envelope objective
//   J(G) = log|G' M G| + log|G' (M+U)^{-1} G|
// evaluated on a semi-orthogonal basis. Conventions: 0 for k = 0 and
// log|M| - log|M+U| for k = p. Depends on the basis only through its span.
double objective_fg(const EnvelopeBasis& basis, const MomentPair& mp);

// One-direction objective phi(w) = log(w' M w) + log(w' A w) on the unit
// sphere, where A is the precomputed inverse of M + U in the deflated
// coordinates. Even in w.
double objective_1d_step(const Vector& w, const Matrix& m_k, const Matrix& a_k_inv);

// Gradient of phi as a function on R^d, before tangent-space projection:
//   2 M w / (w' M w) + 2 A w / (w' A w).
Vector objective_1d_gradient(const Vector& w, const Matrix& m_k, const Matrix& a_k_inv);

struct Deflation {
  SpdMatrix m_k;
  PsdMatrix u_k;
  EnvelopeBasis g0;  // orthonormal completion of the deflating basis
};

// Restriction of (M, U) to the orthogonal complement of span(g):
// m_k = g0' M g0, u_k = g0' U g0.
Deflation deflate(const MomentPair& mp, const EnvelopeBasis& g);

// Quasi-likelihood ln(M, theta) = log|M| + tr[M^{-1} {Mhat + (thetahat - theta)(thetahat - theta)'}].
// Requires a MomentPair with a standard estimator attached.
double quasi_loglik(const SpdMatrix& m, const Matrix& theta, const MomentPair& mp);

// Plug-in estimators at a fixed basis: eta = G' theta, Omega = G' M G,
// Omega0 = G0' (M+U) G0, theta_env = G G' theta, m_env = P M P + Q M Q,
// plus the objective value at the basis.
EnvelopeFit envelope_fit_from_basis(const EnvelopeBasis& basis, const MomentPair& mp);

// The matrix G Omega G' + G0 Omega0 G0' = P M P + Q (M+U) Q at which the
// partially minimized quasi-likelihood attains J(G) + log|M+U| + p.
Matrix quasi_plugin_matrix(const EnvelopeBasis& basis, const MomentPair& mp);

// Frobenius norm of the difference of orthogonal projectors; zero exactly
// when the two bases span the same subspace.
double subspace_distance(const EnvelopeBasis& a, const EnvelopeBasis& b);

}  // namespace envelope
