#include "envelope/core.hpp"

#include <cmath>

namespace envelope {

double objective_fg(const EnvelopeBasis& basis, const MomentPair& mp) {
  if (basis.p() != mp.dim()) {
    throw InputError("objective_fg: basis and moment dimensions differ");
  }
  const int k = basis.k();
  if (k == 0) return 0.0;
  if (k == basis.p()) {
    return logdet_spd(mp.m_hat()) - logdet_spd(mp.m_plus_u());
  }
  const Matrix& g = basis.gamma();
  const Matrix a = inverse_spd(mp.m_plus_u());
  return logdet_spd(symmetrize(g.transpose() * mp.m_hat() * g)) +
         logdet_spd(symmetrize(g.transpose() * a * g));
}

double objective_1d_step(const Vector& w, const Matrix& m_k, const Matrix& a_k_inv) {
  const double nrm = w.norm();
  if (nrm == 0.0) throw InputError("objective_1d_step: zero direction");
  if (std::abs(nrm - 1.0) > 1e-10) {
    throw InputError("objective_1d_step: direction must have unit norm");
  }
  return std::log(w.dot(m_k * w)) + std::log(w.dot(a_k_inv * w));
}

Vector objective_1d_gradient(const Vector& w, const Matrix& m_k, const Matrix& a_k_inv) {
  if (w.norm() == 0.0) throw InputError("objective_1d_gradient: zero direction");
  const Vector mw = m_k * w;
  const Vector aw = a_k_inv * w;
  return 2.0 * mw / w.dot(mw) + 2.0 * aw / w.dot(aw);
}

Deflation deflate(const MomentPair& mp, const EnvelopeBasis& g) {
  const int p = mp.dim();
  if (g.p() != p) throw InputError("deflate: dimension mismatch");
  if (g.k() >= p) throw InputError("deflate: no orthonormal completion exists for k = p");
  Matrix g0 = orthonormal_completion(g.gamma(), p);
  Matrix m_k = symmetrize(g0.transpose() * mp.m_hat() * g0);
  Matrix u_k = symmetrize(g0.transpose() * mp.u_hat() * g0);
  return Deflation{SpdMatrix(std::move(m_k)), PsdMatrix(std::move(u_k)),
                   EnvelopeBasis(std::move(g0))};
}

double quasi_loglik(const SpdMatrix& m, const Matrix& theta, const MomentPair& mp) {
  if (!mp.theta_hat()) {
    throw InputError("quasi_loglik: MomentPair carries no standard estimator");
  }
  const Matrix& theta_hat = *mp.theta_hat();
  if (m.dim() != mp.dim() || theta.rows() != theta_hat.rows() ||
      theta.cols() != theta_hat.cols()) {
    throw InputError("quasi_loglik: dimension mismatch");
  }
  const Matrix diff = theta_hat - theta;
  const Matrix inner = mp.m_hat() + diff * diff.transpose();
  return logdet_spd(m.entries()) + (inverse_spd(m.entries()) * inner).trace();
}

EnvelopeFit envelope_fit_from_basis(const EnvelopeBasis& basis, const MomentPair& mp) {
  const int p = mp.dim();
  if (basis.p() != p) throw InputError("envelope_fit_from_basis: dimension mismatch");
  const int k = basis.k();
  const Matrix& g = basis.gamma();
  const Matrix g0 = orthonormal_completion(g, p);

  EnvelopeFit fit{basis, std::nullopt, std::nullopt,
                  symmetrize(g.transpose() * mp.m_hat() * g),
                  symmetrize(g0.transpose() * mp.m_plus_u() * g0), Matrix(), 0.0};

  if (k == 0) {
    fit.m_env = mp.m_hat();
  } else if (k == p) {
    fit.m_env = mp.m_hat();
  } else {
    const Matrix proj = basis.projector();
    const Matrix q = Matrix::Identity(p, p) - proj;
    fit.m_env = symmetrize(proj * mp.m_hat() * proj + q * mp.m_hat() * q);
  }

  if (mp.theta_hat()) {
    const Matrix& theta_hat = *mp.theta_hat();
    fit.eta_hat = g.transpose() * theta_hat;
    if (k == 0) {
      fit.theta_env = Matrix::Zero(p, theta_hat.cols());
    } else if (k == p) {
      fit.theta_env = theta_hat;  // full-space projection is the identity
    } else {
      fit.theta_env = g * (*fit.eta_hat);
    }
  }

  fit.objective = objective_fg(basis, mp);
  return fit;
}

Matrix quasi_plugin_matrix(const EnvelopeBasis& basis, const MomentPair& mp) {
  const int p = mp.dim();
  if (basis.p() != p) throw InputError("quasi_plugin_matrix: dimension mismatch");
  if (basis.k() == 0) return mp.m_plus_u();
  if (basis.k() == p) return mp.m_hat();
  const Matrix proj = basis.projector();
  const Matrix q = Matrix::Identity(p, p) - proj;
  return symmetrize(proj * mp.m_hat() * proj + q * mp.m_plus_u() * q);
}

double subspace_distance(const EnvelopeBasis& a, const EnvelopeBasis& b) {
  if (a.p() != b.p()) throw InputError("subspace_distance: ambient dimensions differ");
  return (a.projector() - b.projector()).norm();
}

}  // namespace envelope
