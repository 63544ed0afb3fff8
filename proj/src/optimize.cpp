#include "envelope/optimize.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "envelope/core.hpp"
#include "envelope/rng.hpp"

namespace envelope {

namespace {

constexpr double kArmijoContraction = 0.5;
constexpr double kArmijoSlope = 1e-4;
constexpr double kMinStep = 1e-16;
constexpr double kTieTolerance = 1e-12;

double sphere_value(const Vector& w, const Matrix& m, const Matrix& a) {
  return std::log(w.dot(m * w)) + std::log(w.dot(a * w));
}

// Fix the sign so the largest-magnitude coordinate is positive; phi is even.
void canonicalize_sign(Vector& w) {
  int idx = 0;
  w.cwiseAbs().maxCoeff(&idx);
  if (w(idx) < 0.0) w = -w;
}

Vector random_unit(int d, Rng& rng) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.normal();
  const double n = v.norm();
  return n > 0.0 ? Vector(v / n) : Vector(Vector::Unit(d, 0));
}

// Projected gradient descent on the sphere with backtracking line search.
SphereSolution descend_sphere(Vector w, const Matrix& m, const Matrix& a,
                              const OptimizerSettings& settings) {
  double value = sphere_value(w, m, a);
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    const Vector g = objective_1d_gradient(w, m, a);
    const Vector gt = g - w.dot(g) * w;
    const double gnorm = gt.norm();
    if (gnorm <= settings.gradient_tolerance) break;
    double step = 1.0;
    bool accepted = false;
    while (step >= kMinStep) {
      Vector cand = w - step * gt;
      cand /= cand.norm();
      const double cand_value = sphere_value(cand, m, a);
      if (cand_value <= value - kArmijoSlope * step * gnorm * gnorm) {
        w = cand;
        value = cand_value;
        accepted = true;
        break;
      }
      step *= kArmijoContraction;
    }
    if (!accepted) break;  // line search stalled at numerical resolution
  }
  return {w, value};
}

Matrix grassmann_gradient(const Matrix& g, const Matrix& m, const Matrix& a) {
  const Matrix mg = m * g;
  const Matrix ag = a * g;
  const Matrix grad = 2.0 * mg * inverse_spd(symmetrize(g.transpose() * mg)) +
                      2.0 * ag * inverse_spd(symmetrize(g.transpose() * ag));
  return grad - g * (g.transpose() * grad);  // tangent of Gr(p, k)
}

double grassmann_value(const Matrix& g, const Matrix& m, const Matrix& a) {
  return logdet_spd(symmetrize(g.transpose() * m * g)) +
         logdet_spd(symmetrize(g.transpose() * a * g));
}

struct GrassmannSolution {
  Matrix gamma;
  double value = 0.0;
};

GrassmannSolution descend_grassmann(Matrix g, const Matrix& m, const Matrix& a,
                                    const OptimizerSettings& settings) {
  double value = grassmann_value(g, m, a);
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    const Matrix grad = grassmann_gradient(g, m, a);
    const double gnorm = grad.norm();
    if (gnorm <= settings.gradient_tolerance) break;
    double step = 1.0;
    bool accepted = false;
    while (step >= kMinStep) {
      const Matrix cand = thin_qr_orthonormal(g - step * grad);
      const double cand_value = grassmann_value(cand, m, a);
      if (cand_value <= value - kArmijoSlope * step * gnorm * gnorm) {
        g = cand;
        value = cand_value;
        accepted = true;
        break;
      }
      step *= kArmijoContraction;
    }
    if (!accepted) break;
  }
  return {g, value};
}

}  // namespace

SphereSolution solve_sphere(const SpdMatrix& m_k, const PsdMatrix& u_k,
                            const OptimizerSettings& settings) {
  settings.validate();
  if (m_k.dim() != u_k.dim()) throw InputError("solve_sphere: dimension mismatch");
  const int d = m_k.dim();
  const Matrix& m = m_k.entries();
  if (d == 1) {
    const double mu = m(0, 0) + u_k.entries()(0, 0);
    if (mu <= 0.0) throw SingularityError("solve_sphere: M + U is singular");
    return {Vector::Ones(1), std::log(m(0, 0)) - std::log(mu)};
  }
  const Matrix a = inverse_spd(m + u_k.entries());

  // Deterministic start: best unit eigenvector of M and of M + U.
  Eigen::SelfAdjointEigenSolver<Matrix> eig_m(m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig_mu(m + u_k.entries());
  Vector best_start = eig_m.eigenvectors().col(0);
  double best_start_value = std::numeric_limits<double>::infinity();
  for (int j = 0; j < d; ++j) {
    for (const auto* solver : {&eig_m, &eig_mu}) {
      const Vector v = solver->eigenvectors().col(j);
      const double val = sphere_value(v, m, a);
      if (val < best_start_value) {
        best_start_value = val;
        best_start = v;
      }
    }
  }

  SphereSolution best = descend_sphere(best_start, m, a, settings);
  for (int s = 1; s < settings.num_multistarts; ++s) {
    Rng rng = Rng::substream(settings.seed, static_cast<std::uint64_t>(s));
    SphereSolution cand = descend_sphere(random_unit(d, rng), m, a, settings);
    if (cand.value < best.value - kTieTolerance) best = cand;
  }
  canonicalize_sign(best.w);
  best.value = sphere_value(best.w, m, a);
  return best;
}

OneDRaw one_d_path_raw(const MomentPair& mp, int steps, const OptimizerSettings& settings) {
  const int p = mp.dim();
  if (steps < 1 || steps > p - 1) {
    throw InputError("one_d_path_raw: steps must satisfy 1 <= steps <= p - 1");
  }
  OneDRaw out;
  out.directions = Matrix(p, steps);
  out.values.reserve(steps);

  Matrix g0 = Matrix::Identity(p, p);  // completion of the current prefix
  Matrix m_k = mp.m_hat();
  Matrix u_k = mp.u_hat();
  for (int j = 0; j < steps; ++j) {
    const OptimizerSettings step_settings =
        settings.with_seed(Rng::substream(settings.seed, 0x1d00 + j).next_u64());
    const SphereSolution sol =
        solve_sphere(SpdMatrix(m_k), PsdMatrix(u_k), step_settings);
    out.directions.col(j) = g0 * sol.w;
    out.values.push_back(sol.value);
    if (j + 1 < steps) {
      const Matrix w0 = unit_vector_completion(sol.w);
      g0 = g0 * w0;
      m_k = symmetrize(w0.transpose() * m_k * w0);
      u_k = symmetrize(w0.transpose() * u_k * w0);
    }
  }
  return out;
}

EnvelopeBasis solve_grassmann(const MomentPair& mp, int k,
                              const std::optional<EnvelopeBasis>& init,
                              const OptimizerSettings& settings) {
  settings.validate();
  const int p = mp.dim();
  if (k < 1 || k > p - 1) {
    throw InputError("solve_grassmann: k must satisfy 1 <= k <= p - 1");
  }
  if (init && (init->p() != p || init->k() != k)) {
    throw InputError("solve_grassmann: init has wrong shape");
  }
  const Matrix& m = mp.m_hat();
  const Matrix a = inverse_spd(mp.m_plus_u());

  Matrix warm;
  if (init) {
    warm = init->gamma();
  } else {
    warm = one_d_path_raw(mp, k, settings).directions;
  }

  GrassmannSolution best = descend_grassmann(warm, m, a, settings);
  for (int s = 1; s < settings.num_multistarts; ++s) {
    Rng rng = Rng::substream(settings.seed, 0x66000000ULL + static_cast<std::uint64_t>(s));
    Matrix start(p, k);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < k; ++j) start(i, j) = rng.normal();
    GrassmannSolution cand = descend_grassmann(thin_qr_orthonormal(start), m, a, settings);
    if (cand.value < best.value - kTieTolerance) best = cand;
  }
  return EnvelopeBasis(thin_qr_orthonormal(best.gamma));
}

}  // namespace envelope
