#include "envelope/selection.hpp"

#include <cmath>

#include "envelope/rng.hpp"

namespace envelope {

namespace {

// Final 1D step value after deflating by the whole (p-1)-direction path:
// the restriction is scalar, so the minimizer is w = 1.
double final_scalar_step(const OneDPath& path, const MomentPair& mp) {
  const Deflation d = deflate(mp, path.prefix(path.steps()));
  const double m = d.m_k.entries()(0, 0);
  const double mu = m + d.u_k.entries()(0, 0);
  if (mu <= 0.0) throw SingularityError("criterion_1d: M + U restriction is singular");
  return std::log(m) - std::log(mu);
}

}  // namespace

OneDPath run_1d_algorithm(const MomentPair& mp, int steps, const OptimizerSettings& settings) {
  settings.validate();
  OneDRaw raw = one_d_path_raw(mp, steps, settings);
  return OneDPath{mp.dim(), std::move(raw.directions), std::move(raw.values)};
}

std::vector<double> one_d_objective_profile(const OneDPath& path, const MomentPair& mp, int kmax) {
  const int p = mp.dim();
  if (kmax < 0 || kmax > p) throw InputError("one_d_objective_profile: kmax out of range");
  if (path.steps() < std::min(kmax, p - 1)) {
    throw InputError("one_d_objective_profile: path has too few steps");
  }
  std::vector<double> values(kmax + 1, 0.0);
  double partial = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    if (k <= path.steps())
      partial += path.step_values[k - 1];
    else
      partial += final_scalar_step(path, mp);  // only reachable at k = p
    values[k] = partial;
  }
  return values;
}

FgProfile fg_objective_profile(const MomentPair& mp, int kmax, const OptimizerSettings& settings,
                               const OneDPath* warm_path) {
  const int p = mp.dim();
  if (kmax < 0 || kmax > p) throw InputError("fg_objective_profile: kmax out of range");
  FgProfile profile;
  profile.objective.assign(kmax + 1, 0.0);
  profile.bases.reserve(kmax + 1);
  profile.bases.emplace_back(p);

  OneDPath local_path;
  const OneDPath* path = warm_path;
  const int warm_steps = std::min(kmax, p - 1);
  if (!path && warm_steps >= 1) {
    local_path = run_1d_algorithm(mp, warm_steps, settings);
    path = &local_path;
  }
  if (path && path->steps() < warm_steps) {
    throw InputError("fg_objective_profile: warm path has too few steps");
  }

  for (int k = 1; k <= kmax; ++k) {
    if (k == p) {
      profile.objective[k] = logdet_spd(mp.m_hat()) - logdet_spd(mp.m_plus_u());
      profile.bases.emplace_back(Matrix(Matrix::Identity(p, p)));
      continue;
    }
    const OptimizerSettings k_settings =
        settings.with_seed(Rng::substream(settings.seed, 0xf600 + k).next_u64());
    EnvelopeBasis basis =
        solve_grassmann(mp, k, std::optional<EnvelopeBasis>(path->prefix(k)), k_settings);
    profile.objective[k] = objective_fg(basis, mp);
    profile.bases.push_back(std::move(basis));
  }
  return profile;
}

SelectionResult select_from_profile(const std::vector<double>& objective, int n, double constant_c,
                                    Method method) {
  if (objective.empty()) throw InputError("select_from_profile: empty profile");
  if (n < 1) throw InputError("select_from_profile: n must be positive");
  SelectionResult result;
  result.constant_c = constant_c;
  result.method = method;
  result.criterion_values.resize(objective.size());
  const double unit_penalty = constant_c * std::log(static_cast<double>(n)) / n;
  result.criterion_values[0] = 0.0;
  for (std::size_t k = 1; k < objective.size(); ++k) {
    result.criterion_values[k] = objective[k] + static_cast<double>(k) * unit_penalty;
  }
  int best = 0;
  for (std::size_t k = 1; k < result.criterion_values.size(); ++k) {
    if (result.criterion_values[k] < result.criterion_values[best]) best = static_cast<int>(k);
  }
  result.selected_u = best;
  return result;
}

SelectionResult criterion_1d(const OneDPath& path, const MomentPair& mp,
                             const SelectionConfig& config) {
  config.validate();
  const int kmax = config.resolved_kmax(mp.dim());
  return select_from_profile(one_d_objective_profile(path, mp, kmax), mp.n(), config.constant_c,
                             Method::OneD);
}

SelectionResult criterion_fg(const MomentPair& mp, const SelectionConfig& config) {
  config.validate();
  const int kmax = config.resolved_kmax(mp.dim());
  const FgProfile profile = fg_objective_profile(mp, kmax, config.optimizer);
  return select_from_profile(profile.objective, mp.n(), config.constant_c, Method::FG);
}

std::pair<SelectionResult, EnvelopeFit> select_dimension(const MomentPair& mp,
                                                         const SelectionConfig& config) {
  config.validate();
  const int p = mp.dim();
  const int kmax = config.resolved_kmax(p);

  if (config.method == Method::OneD) {
    const int steps = std::min(kmax, p - 1);
    SelectionResult result;
    EnvelopeBasis basis(p);
    if (steps >= 1) {
      const OneDPath path = run_1d_algorithm(mp, steps, config.optimizer);
      result = criterion_1d(path, mp, config);
      basis = path.prefix(std::min(result.selected_u, path.steps()));
      if (result.selected_u == p) basis = EnvelopeBasis(Matrix(Matrix::Identity(p, p)));
    } else {
      result = select_from_profile(one_d_objective_profile(OneDPath{p, Matrix(p, 0), {}}, mp, kmax),
                                   mp.n(), config.constant_c, Method::OneD);
      if (result.selected_u == p) basis = EnvelopeBasis(Matrix(Matrix::Identity(p, p)));
    }
    return {result, envelope_fit_from_basis(basis, mp)};
  }

  const FgProfile profile = fg_objective_profile(mp, kmax, config.optimizer);
  SelectionResult result =
      select_from_profile(profile.objective, mp.n(), config.constant_c, Method::FG);
  return {result, envelope_fit_from_basis(profile.bases[result.selected_u], mp)};
}

}  // namespace envelope
