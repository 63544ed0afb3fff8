#pragma once

#include <utility>
#include <vector>

#include "envelope/core.hpp"
#include "envelope/optimize.hpp"

namespace envelope {

struct SelectionConfig {
  double constant_c = 1.0;  // penalty multiplier; C = q matches a p x q parameter
  int kmax = -1;            // -1 means p
  Method method = Method::OneD;
  OptimizerSettings optimizer;

  int resolved_kmax(int p) const {
    const int k = kmax < 0 ? p : kmax;
    if (k > p) throw InputError("SelectionConfig: kmax exceeds the ambient dimension");
    return k;
  }
  void validate() const {
    if (constant_c <= 0.0) throw InputError("SelectionConfig: constant_c must be positive");
    optimizer.validate();
  }
};

// Run the sequential 1D algorithm for the given number of steps; a single
// call yields every prefix of the nested path.
OneDPath run_1d_algorithm(const MomentPair& mp, int steps, const OptimizerSettings& settings);

// Cumulative 1D objective values for k = 0..kmax. The value at k = p adds
// the final one-dimensional step, which needs no optimization.
std::vector<double> one_d_objective_profile(const OneDPath& path, const MomentPair& mp, int kmax);

// Per-dimension Grassmannian minima J(Gamma_k) for k = 0..kmax, with the
// minimizing bases. Each solve is warm-started from the 1D path prefix.
struct FgProfile {
  std::vector<double> objective;
  std::vector<EnvelopeBasis> bases;
};
FgProfile fg_objective_profile(const MomentPair& mp, int kmax, const OptimizerSettings& settings,
                               const OneDPath* warm_path = nullptr);

// Penalized criterion values obj[k] + C k log(n)/n and the smallest argmin.
SelectionResult select_from_profile(const std::vector<double>& objective, int n, double constant_c,
                                    Method method);

SelectionResult criterion_1d(const OneDPath& path, const MomentPair& mp, const SelectionConfig& config);
SelectionResult criterion_fg(const MomentPair& mp, const SelectionConfig& config);

// Run the configured criterion, then fit at the selected dimension: the
// path prefix for the 1D method, the Grassmannian solution for FG.
std::pair<SelectionResult, EnvelopeFit> select_dimension(const MomentPair& mp,
                                                         const SelectionConfig& config);

}  // namespace envelope
