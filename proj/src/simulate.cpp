#include "envelope/simulate.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "envelope/parallel.hpp"
#include "envelope/selection.hpp"

namespace envelope {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix uniform_matrix(int rows, int cols, Rng& rng) {
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.uniform();
  return a;
}

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.normal();
  return a;
}

// Lower-triangular Bartlett factor of W_d(I, dof).
Matrix bartlett_factor(int d, int dof, Rng& rng) {
  Matrix a = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
    a(i, i) = std::sqrt(rng.chi_squared(static_cast<double>(dof - i)));
  }
  return a;
}

Vector exponent_grid(int count) {
  Vector g(count);
  if (count == 1) {
    g(0) = -4.0;
    return g;
  }
  const double step = 7.0 / (count - 1);  // -4 .. 3
  for (int i = 0; i < count; ++i) g(i) = -4.0 + step * i;
  return g;
}

Matrix rotated_diagonal(const Vector& diag, Rng& rng) {
  const Matrix o = random_semiorthogonal(static_cast<int>(diag.size()),
                                         static_cast<int>(diag.size()), rng)
                       .gamma();
  return symmetrize(o * diag.asDiagonal() * o.transpose());
}

ErrStats summarize(const std::vector<double>& values) {
  ErrStats s;
  const int n = static_cast<int>(values.size());
  if (n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / (n - 1) / n);
  }
  return s;
}

void fill_histogram(ScenarioRow& row, const std::vector<int>& selected, int kmax, int true_u) {
  row.freq.assign(kmax + 1, 0);
  row.true_u = true_u;
  row.correct = 0;
  double sum = 0.0;
  for (int u : selected) {
    row.freq[u] += 1;
    if (u == true_u) row.correct += 1;
    sum += u;
  }
  row.replicates = static_cast<int>(selected.size());
  row.mean_selected = selected.empty() ? 0.0 : sum / selected.size();
}

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

const char* generic_model_name(GenericModel m) {
  switch (m) {
    case GenericModel::I: return "I";
    case GenericModel::II: return "II";
    default: return "III";
  }
}

const char* reg_model_name(RegModel m) {
  switch (m) {
    case RegModel::Linear: return "linear";
    case RegModel::Logistic: return "logistic";
    default: return "cox";
  }
}

Matrix GenericEnvelopeSpec::m() const {
  const Matrix g0 = orthonormal_completion(gamma.gamma(), p);
  return symmetrize(gamma.gamma() * omega * gamma.gamma().transpose() +
                    g0 * omega0 * g0.transpose());
}

Matrix GenericEnvelopeSpec::u_mat() const {
  return symmetrize(gamma.gamma() * phi * gamma.gamma().transpose());
}

EnvelopeBasis random_semiorthogonal(int p, int k, Rng& rng) {
  if (k > p || k < 0 || p < 1) throw InputError("random_semiorthogonal: need 0 <= k <= p");
  if (k == 0) return EnvelopeBasis(p);
  return EnvelopeBasis(thin_qr_orthonormal(gaussian_matrix(p, k, rng)));
}

SpdMatrix sample_wishart(const SpdMatrix& scale, int dof, Rng& rng) {
  const int p = scale.dim();
  if (dof < p) throw InputError("sample_wishart: dof must be >= dimension for an SPD draw");
  Eigen::LLT<Matrix> llt(scale.entries());
  const Matrix la = llt.matrixL() * bartlett_factor(p, dof, rng);
  return SpdMatrix(symmetrize(la * la.transpose()));
}

Matrix sample_wishart_psd(const Matrix& scale, int dof, Rng& rng) {
  const Matrix s = symmetrize(scale);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const int p = static_cast<int>(s.rows());
  const double lmax = eig.eigenvalues().cwiseMax(0.0).maxCoeff();
  if (lmax <= 0.0) return Matrix::Zero(p, p);
  int rank = 0;
  for (int i = 0; i < p; ++i) {
    if (eig.eigenvalues()(i) > 1e-12 * lmax) ++rank;
  }
  if (dof < rank) throw InputError("sample_wishart_psd: dof must be >= rank of the scale");
  Matrix b(p, rank);
  int col = 0;
  for (int i = 0; i < p; ++i) {
    if (eig.eigenvalues()(i) > 1e-12 * lmax) {
      b.col(col++) = std::sqrt(eig.eigenvalues()(i)) * eig.eigenvectors().col(i);
    }
  }
  const Matrix ba = b * bartlett_factor(rank, dof, rng);
  return symmetrize(ba * ba.transpose());
}

GenericEnvelopeSpec gen_generic(GenericModel model, int p, int u, Rng& rng) {
  if (u < 1 || u >= p) throw InputError("gen_generic: need 1 <= u < p");
  GenericEnvelopeSpec spec;
  spec.p = p;
  spec.u = u;
  spec.model = model;
  spec.gamma = random_semiorthogonal(p, u, rng);
  {
    const Matrix a = uniform_matrix(u, u, rng);
    spec.phi = symmetrize(a * a.transpose());
  }
  switch (model) {
    case GenericModel::I: {
      const Matrix a1 = uniform_matrix(u, u, rng);
      spec.omega = symmetrize(a1 * a1.transpose());
      const Matrix a2 = uniform_matrix(p - u, p - u, rng);
      spec.omega0 = symmetrize(a2 * a2.transpose());
      break;
    }
    case GenericModel::II:
    case GenericModel::III: {
      Vector d(u);
      for (int i = 0; i < u; ++i) d(i) = i + 1.0;
      spec.omega = rotated_diagonal(d, rng);
      if (model == GenericModel::II) {
        spec.omega0 = rotated_diagonal(exponent_grid(p - u).array().exp().matrix(), rng);
      } else {
        spec.omega0 = 0.1 * Matrix::Identity(p - u, p - u);
      }
      break;
    }
  }
  return spec;
}

RegressionPopulation gen_reg_population(RegModel model, int q, Rng& rng) {
  RegressionPopulation pop;
  pop.model = model;
  pop.q = q;
  pop.gamma = random_semiorthogonal(pop.p, pop.u, rng);
  Vector d(pop.u);
  d << 1.0, 5.0;
  const Matrix omega = rotated_diagonal(d, rng);
  Matrix omega0;
  if (model == RegModel::Cox) {
    omega0 = 0.1 * Matrix::Identity(pop.p - pop.u, pop.p - pop.u);
  } else {
    Vector e(pop.p - pop.u);
    for (int i = 0; i < pop.p - pop.u; ++i) e(i) = std::exp(-4.0 + i);
    omega0 = rotated_diagonal(e, rng);
  }
  const Matrix g0 = orthonormal_completion(pop.gamma.gamma(), pop.p);
  pop.sigma = symmetrize(pop.gamma.gamma() * omega * pop.gamma.gamma().transpose() +
                         g0 * omega0 * g0.transpose());
  const double eta_value = model == RegModel::Cox ? 0.2 : 1.0;
  pop.beta = pop.gamma.gamma() * Matrix::Constant(pop.u, q, eta_value);
  return pop;
}

RegressionData sample_regression(const RegressionPopulation& pop, int n, Rng& rng) {
  const Matrix chol_sigma = Eigen::LLT<Matrix>(pop.sigma).matrixL();
  switch (pop.model) {
    case RegModel::Linear: {
      const Matrix x = gaussian_matrix(n, pop.q, rng);
      const Matrix e = gaussian_matrix(n, pop.p, rng) * chol_sigma.transpose();
      return RegressionData(x, x * pop.beta.transpose() + e);
    }
    case RegModel::Logistic: {
      const Matrix x = gaussian_matrix(n, pop.p, rng) * chol_sigma.transpose();
      const Vector eta = x * pop.beta.col(0);
      Matrix y(n, 1);
      for (int i = 0; i < n; ++i) {
        const double prob = 1.0 / (1.0 + std::exp(-eta(i)));
        y(i, 0) = rng.bernoulli(prob) ? 1.0 : 0.0;
      }
      return RegressionData(x, y);
    }
    default: {
      // Weibull failure times with hazard 5 t^4 exp(beta'x); censoring flags
      // drawn as Bernoulli(0.5), 1 = observed.
      const Matrix x = gaussian_matrix(n, pop.p, rng) * chol_sigma.transpose();
      const Vector eta = x * pop.beta.col(0);
      Matrix y(n, 1);
      Eigen::VectorXi flags(n);
      for (int i = 0; i < n; ++i) {
        const double w = -std::log(rng.uniform_pos());
        y(i, 0) = std::pow(w, 0.2) * std::exp(-eta(i) / 5.0);
        flags(i) = rng.bernoulli(0.5) ? 1 : 0;
      }
      return RegressionData(x, y, flags);
    }
  }
}

RegressionSim gen_regression(RegModel model, int n, Rng& rng, int q) {
  const RegressionPopulation pop = gen_reg_population(model, q, rng);
  RegressionData data = sample_regression(pop, n, rng);
  return RegressionSim{std::move(data), pop.beta, pop.gamma};
}

// Monte Carlo scenario runners ----------------------------------------------

namespace {

constexpr std::uint64_t kPopulationTag = 0x706f70;  // population substream
constexpr std::uint64_t kDataTag = 0x646174;        // replicate data substream
constexpr std::uint64_t kSolverTag = 0x736f6c;      // optimizer seeds

MomentPair moments_for(const RegModel model, const RegressionData& data) {
  switch (model) {
    case RegModel::Linear: return response_envelope_moments(data);
    case RegModel::Logistic: return glm_envelope_moments(data, GlmWeighting::Weighted);
    default: return cox_envelope_moments(data);
  }
}

Matrix standard_beta(const RegModel model, const RegressionData& data) {
  switch (model) {
    case RegModel::Linear: return standard_linear_fit(data).beta_hat;
    case RegModel::Logistic: return standard_logistic_fit(data).beta_hat;
    default: return standard_cox_fit(data).beta_hat;
  }
}

}  // namespace

std::vector<ScenarioRow> run_t2_scenario(GenericModel model, int n, int replicates,
                                         std::uint64_t seed, int threads, bool with_fg,
                                         const OptimizerSettings& settings, int fg_kmax) {
  const auto start = Clock::now();
  const int p = 20, u = 5;
  Rng pop_rng(seed_chain(seed, {kPopulationTag, 2, static_cast<std::uint64_t>(model)}));
  const GenericEnvelopeSpec spec = gen_generic(model, p, u, pop_rng);
  const SpdMatrix m_scale(spec.m() / n);
  const Matrix u_scale = spec.u_mat() / n;
  const int kmax_1d = p;
  const int kmax_fg = fg_kmax < 0 ? p : fg_kmax;

  std::vector<int> sel_1d(replicates), sel_fg(with_fg ? replicates : 0);
  parallel_for(replicates, threads, [&](int rep) {
    Rng rng(seed_chain(seed, {kDataTag, 2, static_cast<std::uint64_t>(model),
                              static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)}));
    const SpdMatrix m_hat = sample_wishart(m_scale, n, rng);
    const PsdMatrix u_hat{sample_wishart_psd(u_scale, n, rng)};
    const MomentPair mp(m_hat, u_hat, n);
    const OptimizerSettings os = settings.with_seed(
        seed_chain(seed, {kSolverTag, 2, static_cast<std::uint64_t>(model),
                          static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)}));
    const OneDPath path = run_1d_algorithm(mp, p - 1, os);
    sel_1d[rep] =
        select_from_profile(one_d_objective_profile(path, mp, kmax_1d), n, 1.0, Method::OneD)
            .selected_u;
    if (with_fg) {
      const FgProfile prof = fg_objective_profile(mp, kmax_fg, os, &path);
      sel_fg[rep] = select_from_profile(prof.objective, n, 1.0, Method::FG).selected_u;
    }
  });

  std::vector<ScenarioRow> rows;
  ScenarioRow row_1d;
  row_1d.table = "T2";
  row_1d.scenario = generic_model_name(model);
  row_1d.method = "1d";
  row_1d.n = n;
  row_1d.constant_c = 1.0;
  fill_histogram(row_1d, sel_1d, kmax_1d, u);
  row_1d.seconds = elapsed_seconds(start);
  rows.push_back(std::move(row_1d));
  if (with_fg) {
    ScenarioRow row_fg;
    row_fg.table = "T2";
    row_fg.scenario = generic_model_name(model);
    row_fg.method = "fg";
    row_fg.n = n;
    row_fg.constant_c = 1.0;
    fill_histogram(row_fg, sel_fg, kmax_fg, u);
    row_fg.seconds = elapsed_seconds(start);
    rows.push_back(std::move(row_fg));
  }
  return rows;
}

std::vector<ScenarioRow> run_t3_scenario(RegModel model, int n, int replicates,
                                         std::uint64_t seed, int threads, bool with_fg,
                                         const OptimizerSettings& settings) {
  const auto start = Clock::now();
  Rng pop_rng(seed_chain(seed, {kPopulationTag, 3, static_cast<std::uint64_t>(model)}));
  const RegressionPopulation pop = gen_reg_population(model, 1, pop_rng);
  const int p = pop.p;

  std::vector<int> sel_1d(replicates), sel_fg(with_fg ? replicates : 0);
  std::vector<double> err_std(replicates), err_true(replicates), err_1d(replicates),
      err_fg(with_fg ? replicates : 0);
  parallel_for(replicates, threads, [&](int rep) {
    Rng rng(seed_chain(seed, {kDataTag, 3, static_cast<std::uint64_t>(model),
                              static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)}));
    const RegressionData data = sample_regression(pop, n, rng);
    const Matrix beta_hat = standard_beta(model, data);
    const MomentPair mp = moments_for(model, data);
    const OptimizerSettings os = settings.with_seed(
        seed_chain(seed, {kSolverTag, 3, static_cast<std::uint64_t>(model),
                          static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)}));
    const OneDPath path = run_1d_algorithm(mp, p - 1, os);
    const SelectionResult res_1d =
        select_from_profile(one_d_objective_profile(path, mp, p), n, 1.0, Method::OneD);
    sel_1d[rep] = res_1d.selected_u;

    err_std[rep] = (beta_hat - pop.beta).norm();
    err_true[rep] = (path.prefix(pop.u).projector() * beta_hat - pop.beta).norm();
    const Matrix proj_1d = res_1d.selected_u >= p
                               ? Matrix::Identity(p, p)
                               : path.prefix(res_1d.selected_u).projector();
    err_1d[rep] = (proj_1d * beta_hat - pop.beta).norm();

    if (with_fg) {
      const FgProfile prof = fg_objective_profile(mp, p, os, &path);
      const SelectionResult res_fg =
          select_from_profile(prof.objective, n, 1.0, Method::FG);
      sel_fg[rep] = res_fg.selected_u;
      err_fg[rep] = (prof.bases[res_fg.selected_u].projector() * beta_hat - pop.beta).norm();
    }
  });

  std::vector<ScenarioRow> rows;
  ScenarioRow row;
  row.table = "T3";
  row.scenario = reg_model_name(model);
  row.method = "1d";
  row.n = n;
  row.constant_c = 1.0;
  fill_histogram(row, sel_1d, p, pop.u);
  row.err_standard = summarize(err_std);
  row.err_true_u = summarize(err_true);
  row.err_selected = summarize(err_1d);
  row.seconds = elapsed_seconds(start);
  rows.push_back(row);
  if (with_fg) {
    ScenarioRow row_fg = rows.front();
    row_fg.method = "fg";
    fill_histogram(row_fg, sel_fg, p, pop.u);
    row_fg.err_selected = summarize(err_fg);
    row_fg.seconds = elapsed_seconds(start);
    rows.push_back(std::move(row_fg));
  }
  return rows;
}

std::vector<ScenarioRow> run_t4_scenario(int n, int replicates, std::uint64_t seed, int threads,
                                         const std::vector<double>& c_grid,
                                         const OptimizerSettings& settings) {
  const auto start = Clock::now();
  Rng pop_rng(seed_chain(seed, {kPopulationTag, 4}));
  const RegressionPopulation pop = gen_reg_population(RegModel::Linear, 3, pop_rng);
  const int p = pop.p;
  const int nc = static_cast<int>(c_grid.size());

  std::vector<std::vector<int>> sel_1d(nc, std::vector<int>(replicates));
  std::vector<std::vector<int>> sel_fg(nc, std::vector<int>(replicates));
  parallel_for(replicates, threads, [&](int rep) {
    Rng rng(seed_chain(seed, {kDataTag, 4, static_cast<std::uint64_t>(n),
                              static_cast<std::uint64_t>(rep)}));
    const RegressionData data = sample_regression(pop, n, rng);
    const MomentPair mp = response_envelope_moments(data);
    const OptimizerSettings os = settings.with_seed(seed_chain(
        seed, {kSolverTag, 4, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)}));
    const OneDPath path = run_1d_algorithm(mp, p - 1, os);
    const std::vector<double> prof_1d = one_d_objective_profile(path, mp, p);
    const FgProfile prof_fg = fg_objective_profile(mp, p, os, &path);
    for (int ci = 0; ci < nc; ++ci) {
      sel_1d[ci][rep] =
          select_from_profile(prof_1d, n, c_grid[ci], Method::OneD).selected_u;
      sel_fg[ci][rep] =
          select_from_profile(prof_fg.objective, n, c_grid[ci], Method::FG).selected_u;
    }
  });

  std::vector<ScenarioRow> rows;
  for (int ci = 0; ci < nc; ++ci) {
    for (const char* method : {"1d", "fg"}) {
      ScenarioRow row;
      row.table = "T4";
      row.scenario = "C=" + format_double(c_grid[ci], c_grid[ci] == std::floor(c_grid[ci]) ? 0 : 2);
      row.method = method;
      row.n = n;
      row.constant_c = c_grid[ci];
      fill_histogram(row, method == std::string("1d") ? sel_1d[ci] : sel_fg[ci], p, pop.u);
      row.seconds = elapsed_seconds(start);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

McReport run_table(Table table, int replicates, std::uint64_t seed, int threads) {
  if (replicates < 1) throw InputError("run_table: replicates must be positive");
  McReport report;
  OptimizerSettings settings;
  settings.num_multistarts = 5;
  switch (table) {
    case Table::T2: {
      report.table = "T2";
      OptimizerSettings fg_settings = settings;
      fg_settings.num_multistarts = 3;
      for (GenericModel model : {GenericModel::I, GenericModel::II, GenericModel::III}) {
        for (int n : {150, 200, 250, 300, 400, 800}) {
          auto rows = run_t2_scenario(model, n, replicates, seed, threads, true, fg_settings);
          report.rows.insert(report.rows.end(), rows.begin(), rows.end());
        }
      }
      break;
    }
    case Table::T3: {
      report.table = "T3";
      for (RegModel model : {RegModel::Linear, RegModel::Logistic, RegModel::Cox}) {
        for (int n : {150, 300, 600}) {
          auto rows = run_t3_scenario(model, n, replicates, seed, threads, true, settings);
          report.rows.insert(report.rows.end(), rows.begin(), rows.end());
        }
      }
      break;
    }
    case Table::T4: {
      report.table = "T4";
      for (int n : {150, 300, 600}) {
        auto rows = run_t4_scenario(n, replicates, seed, threads, {1.0, 3.0, 5.0, 10.0}, settings);
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
      }
      break;
    }
  }
  return report;
}

// Serialization ---------------------------------------------------------------

namespace {

std::string join_freq(const std::vector<int>& freq) {
  std::string out;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(freq[i]);
  }
  return out;
}

std::string err_cell(const std::optional<ErrStats>& e, bool mean) {
  if (!e) return "";
  return format_double(mean ? e->mean : e->se, 4);
}

}  // namespace

std::string McReport::to_csv() const {
  std::string out =
      "table,scenario,method,n,C,replicates,true_u,correct,correct_pct,mean_selected,"
      "frequencies,err_standard_mean,err_standard_se,err_true_mean,err_true_se,"
      "err_selected_mean,err_selected_se\n";
  for (const auto& r : rows) {
    out += r.table + ',' + r.scenario + ',' + r.method + ',' + std::to_string(r.n) + ',' +
           format_double(r.constant_c, 4) + ',' + std::to_string(r.replicates) + ',' +
           std::to_string(r.true_u) + ',' + std::to_string(r.correct) + ',' +
           format_double(r.correct_pct(), 1) + ',' + format_double(r.mean_selected, 4) + ',' +
           join_freq(r.freq) + ',' + err_cell(r.err_standard, true) + ',' +
           err_cell(r.err_standard, false) + ',' + err_cell(r.err_true_u, true) + ',' +
           err_cell(r.err_true_u, false) + ',' + err_cell(r.err_selected, true) + ',' +
           err_cell(r.err_selected, false) + '\n';
  }
  return out;
}

std::string McReport::to_text() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-6s %-10s %-4s %6s %6s %9s %8s %7s %10s\n", "table",
                "scenario", "crit", "n", "C", "correct%", "mean_u", "reps", "err(sel)");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-6s %-10s %-4s %6d %6.2f %9.1f %8.4f %7d %10s\n",
                  r.table.c_str(), r.scenario.c_str(), r.method.c_str(), r.n, r.constant_c,
                  r.correct_pct(), r.mean_selected, r.replicates,
                  r.err_selected ? format_double(r.err_selected->mean, 4).c_str() : "-");
    out << line;
  }
  return out.str();
}

}  // namespace envelope
