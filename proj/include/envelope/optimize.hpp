#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "envelope/types.hpp"

namespace envelope {

struct OptimizerSettings {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  int num_multistarts = 10;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iterations < 1 || gradient_tolerance <= 0.0 || num_multistarts < 1) {
      throw InputError("OptimizerSettings: all fields must be positive");
    }
  }
  OptimizerSettings with_seed(std::uint64_t s) const {
    OptimizerSettings out = *this;
    out.seed = s;
    return out;
  }
};

struct SphereSolution {
  Vector w;
  double value = 0.0;
};

// Minimize phi(w) = log(w' M w) + log(w' (M+U)^{-1} w) over the unit sphere.
// Projected gradient descent with Armijo backtracking, started from the best
// unit eigenvector of M and M+U plus seeded random multistarts; the lowest
// value over all starts wins, ties broken by start index.
SphereSolution solve_sphere(const SpdMatrix& m_k, const PsdMatrix& u_k,
                            const OptimizerSettings& settings);

// Minimize J over Gr(p, k) for 1 <= k <= p-1 by projected gradient descent
// with QR retraction. When init is absent the warm start is the first k
// directions of the sequential 1D path; the remaining multistarts are
// random semi-orthogonal bases.
EnvelopeBasis solve_grassmann(const MomentPair& mp, int k,
                              const std::optional<EnvelopeBasis>& init,
                              const OptimizerSettings& settings);

// Sequential one-direction-at-a-time minimization: directions lifted to
// ambient coordinates and the per-step objective values.
struct OneDRaw {
  Matrix directions;
  std::vector<double> values;
};
OneDRaw one_d_path_raw(const MomentPair& mp, int steps, const OptimizerSettings& settings);

}  // namespace envelope
