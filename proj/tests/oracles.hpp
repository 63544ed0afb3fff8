#pragma once

// Test-only construction and reference ("oracle") utilities. These stay
// independent of the library's solver and estimator code paths: expected
// values are computed here by direct enumeration, finite differences, or
// closed-form algebra, then asserted against the implementation.

#include <cmath>
#include <functional>
#include <vector>

#include "envelope/linalg.hpp"
#include "envelope/rng.hpp"
#include "envelope/types.hpp"

namespace oracles {

using envelope::Matrix;
using envelope::Rng;
using envelope::Vector;

inline Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.normal();
  return a;
}

// Orthonormal basis from a Gaussian draw, via modified Gram-Schmidt so the
// construction is independent of the library's QR helper.
inline Matrix random_orthonormal(int p, int k, Rng& rng) {
  Matrix g = gaussian_matrix(p, k, rng);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < j; ++i) g.col(j) -= g.col(i).dot(g.col(j)) * g.col(i);
    g.col(j) /= g.col(j).norm();
  }
  return g;
}

// SPD matrix with eigenvalues uniform in [lo, hi].
inline Matrix random_spd(int p, Rng& rng, double lo = 0.5, double hi = 4.0) {
  const Matrix q = random_orthonormal(p, p, rng);
  Vector lambda(p);
  for (int i = 0; i < p; ++i) lambda(i) = lo + (hi - lo) * rng.uniform();
  return 0.5 * (q * lambda.asDiagonal() * q.transpose() +
                (q * lambda.asDiagonal() * q.transpose()).transpose());
}

inline Matrix random_psd_rank(int p, int rank, Rng& rng, double scale = 1.0) {
  const Matrix b = gaussian_matrix(p, rank, rng);
  return scale * (b * b.transpose());
}

// Envelope-structured population: M has eigenbasis Q with the first u
// eigenvectors carrying U, so the true envelope is span(Q[:, 0..u-1]).
struct PopulationEnvelope {
  Matrix m;
  Matrix u_mat;
  Matrix gamma;  // p x u true envelope basis
};

inline PopulationEnvelope population_envelope(int p, int u, Rng& rng) {
  const Matrix q = random_orthonormal(p, p, rng);
  Vector lambda(p);
  for (int i = 0; i < p; ++i) lambda(i) = 0.5 + 3.5 * rng.uniform();
  const Matrix m = q * lambda.asDiagonal() * q.transpose();
  Vector weights = Vector::Zero(p);
  for (int i = 0; i < u; ++i) weights(i) = 0.5 + rng.uniform();
  const Matrix u_mat = q * weights.asDiagonal() * q.transpose();
  return {0.5 * (m + m.transpose()), 0.5 * (u_mat + u_mat.transpose()), q.leftCols(u)};
}

// Central finite differences for a scalar function on R^d.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& w,
                          double h = 1e-6) {
  Vector g(w.size());
  for (int i = 0; i < w.size(); ++i) {
    Vector wp = w, wm = w;
    wp(i) += h;
    wm(i) -= h;
    g(i) = (f(wp) - f(wm)) / (2.0 * h);
  }
  return g;
}

// Spherical Fibonacci lattice on S^2, a deterministic quasi-uniform grid.
inline std::vector<Vector> fibonacci_sphere(int count) {
  std::vector<Vector> points;
  points.reserve(count);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    Vector v(3);
    v << r * std::cos(phi), r * std::sin(phi), z;
    points.push_back(v);
  }
  return points;
}

// Direct evaluation of the sphere objective, independent of the library.
inline double phi_direct(const Vector& w, const Matrix& m, const Matrix& m_plus_u) {
  const Vector sol = m_plus_u.ldlt().solve(w);
  return std::log(w.dot(m * w)) + std::log(w.dot(sol));
}

// Minimum of phi over a point set.
inline double grid_min_phi(const std::vector<Vector>& points, const Matrix& m,
                           const Matrix& m_plus_u) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : points) best = std::min(best, phi_direct(w, m, m_plus_u));
  return best;
}

// log|A| through an LU path, independent of the Cholesky implementation.
inline double logdet_direct(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  return std::log(a.fullPivLu().determinant());
}

}  // namespace oracles
