#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include "csv_io.hpp"
#include "envelope/rng.hpp"
#include "envelope/selection.hpp"
#include "envelope/simulate.hpp"
#include "json_writer.hpp"

namespace envelope::cli {

namespace {

using Clock = std::chrono::steady_clock;

void write_output(const RunConfig& config, const std::string& content) {
  if (config.output.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(config.output, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open output file: " + config.output);
  out << content;
  if (!out) throw InputError("failed to write output file: " + config.output);
}

struct LoadedProblem {
  MomentPair mp;
  std::optional<RegressionData> data;   // absent for the generic family
  std::optional<StandardFit> standard;  // coefficient-scale estimator
  std::vector<int> x1_cols;
};

RegressionData dataset_to_regression(const Dataset& ds, bool needs_event) {
  if (needs_event && !ds.event) {
    throw InputError("cox family requires an 'event' column");
  }
  return RegressionData(ds.x, ds.y, needs_event ? ds.event : std::nullopt);
}

LoadedProblem load_problem(const RunConfig& config) {
  if (config.input.empty()) throw InputError("--input is required");
  if (config.family == "generic") {
    if (config.n_value < 1) throw InputError("generic family requires --n <sample size>");
    const GenericMatrices gm = read_generic_csv(config.input);
    return LoadedProblem{MomentPair(SpdMatrix(gm.m), PsdMatrix(gm.u), config.n_value),
                         std::nullopt, std::nullopt, {}};
  }
  const Dataset ds = read_data_csv(config.input);
  if (config.family == "response") {
    RegressionData data = dataset_to_regression(ds, false);
    StandardFit fit = standard_linear_fit(data);
    return LoadedProblem{response_envelope_moments(data), std::move(data), std::move(fit), {}};
  }
  if (config.family == "predictor") {
    RegressionData data = dataset_to_regression(ds, false);
    return LoadedProblem{predictor_envelope_moments(data), std::move(data), std::nullopt, {}};
  }
  if (config.family == "partial") {
    if (!ds.has_partial_markers || ds.x1_cols.empty()) {
      throw InputError("partial family requires predictors named x1_* and x2_*");
    }
    RegressionData data = dataset_to_regression(ds, false);
    MomentPair mp = partial_envelope_moments(data, ds.x1_cols);
    return LoadedProblem{std::move(mp), std::move(data), std::nullopt, ds.x1_cols};
  }
  if (config.family == "glm") {
    RegressionData data = dataset_to_regression(ds, false);
    StandardFit fit = standard_logistic_fit(data);
    const GlmWeighting weighting = config.glm_weighting == "unweighted"
                                       ? GlmWeighting::Unweighted
                                       : GlmWeighting::Weighted;
    return LoadedProblem{glm_envelope_moments(data, weighting), std::move(data), std::move(fit), {}};
  }
  if (config.family == "cox") {
    RegressionData data = dataset_to_regression(ds, true);
    StandardFit fit = standard_cox_fit(data);
    return LoadedProblem{cox_envelope_moments(data), std::move(data), std::move(fit), {}};
  }
  throw InputError("unknown family: " + config.family);
}

SelectionConfig make_selection_config(const RunConfig& config, const MomentPair& mp,
                                      Method method) {
  SelectionConfig sc;
  sc.constant_c = config.constant_c;
  sc.kmax = config.kmax;
  sc.method = method;
  sc.optimizer.seed = config.seed;
  if (config.constant_c == 1.0 && mp.q() > 1) {
    std::cerr << "note: theta has " << mp.q()
              << " columns; C = q = " << mp.q()
              << " matches the parameter count (running with C = 1)\n";
  }
  return sc;
}

JsonValue fit_to_json(const EnvelopeFit& fit, const std::optional<Matrix>& beta_env) {
  JsonValue v = JsonValue::object();
  v.set("k", fit.basis.k());
  v.set("objective", fit.objective);
  v.set("gamma", JsonValue::matrix(fit.basis.gamma()));
  v.set("omega", JsonValue::matrix(fit.omega_hat));
  v.set("omega0", JsonValue::matrix(fit.omega0_hat));
  v.set("m_env", JsonValue::matrix(fit.m_env));
  if (fit.eta_hat) v.set("eta", JsonValue::matrix(*fit.eta_hat));
  if (fit.theta_env) v.set("theta_env", JsonValue::matrix(*fit.theta_env));
  if (beta_env) v.set("beta_env", JsonValue::matrix(*beta_env));
  return v;
}

// Envelope estimate on the coefficient scale, where the family has one.
std::optional<Matrix> beta_envelope(const LoadedProblem& problem, const EnvelopeBasis& basis) {
  if (!problem.standard) return std::nullopt;
  return basis.projector() * problem.standard->beta_hat;
}

void append_matrix_csv(std::string& out, const std::string& section, const std::string& criterion,
                       const Matrix& m) {
  char buf[96];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%lld,%lld,%.17g\n", section.c_str(),
                    criterion.c_str(), static_cast<long long>(i), static_cast<long long>(j),
                    m(i, j));
      out += buf;
    }
  }
}

std::vector<Method> requested_methods(const RunConfig& config) {
  if (config.criterion == "1d") return {Method::OneD};
  if (config.criterion == "fg") return {Method::FG};
  if (config.criterion == "both") return {Method::OneD, Method::FG};
  throw InputError("unknown criterion: " + config.criterion);
}

}  // namespace

int run_select(const RunConfig& config) {
  const auto start = Clock::now();
  const LoadedProblem problem = load_problem(config);
  const MomentPair& mp = problem.mp;

  struct MethodResult {
    Method method;
    SelectionResult selection;
    EnvelopeFit fit;
    std::optional<Matrix> beta_env;
  };
  std::vector<MethodResult> results;
  for (Method method : requested_methods(config)) {
    const SelectionConfig sc = make_selection_config(config, mp, method);
    auto [selection, fit] = select_dimension(mp, sc);
    auto beta_env = beta_envelope(problem, fit.basis);
    results.push_back({method, std::move(selection), std::move(fit), std::move(beta_env)});
  }

  std::string content;
  if (config.format == "json") {
    JsonValue doc = JsonValue::object();
    doc.set("schema_version", 1);
    doc.set("command", "select");
    doc.set("family", config.family);
    doc.set("n", mp.n());
    doc.set("p", mp.dim());
    doc.set("q", mp.q());
    doc.set("constant_c", config.constant_c);
    doc.set("seed", config.seed);
    JsonValue& res = doc.set("results", JsonValue::object());
    for (const auto& r : results) {
      JsonValue entry = JsonValue::object();
      JsonValue values = JsonValue::array();
      for (double v : r.selection.criterion_values) values.push(JsonValue(v));
      entry.set("criterion_values", std::move(values));
      entry.set("selected_u", r.selection.selected_u);
      entry.set("fit", fit_to_json(r.fit, r.beta_env));
      res.set(method_name(r.method), std::move(entry));
    }
    content = doc.dump();
    content += '\n';
  } else if (config.format == "csv") {
    content = "section,criterion,i,j,value\n";
    char buf[96];
    for (const auto& r : results) {
      const std::string name = method_name(r.method);
      for (std::size_t k = 0; k < r.selection.criterion_values.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "criterion_values,%s,%lld,0,%.17g\n", name.c_str(),
                      static_cast<long long>(k), r.selection.criterion_values[k]);
        content += buf;
      }
      std::snprintf(buf, sizeof(buf), "selected_u,%s,0,0,%d\n", name.c_str(),
                    r.selection.selected_u);
      content += buf;
      append_matrix_csv(content, "gamma", name, r.fit.basis.gamma());
      if (r.fit.theta_env) append_matrix_csv(content, "theta_env", name, *r.fit.theta_env);
      if (r.beta_env) append_matrix_csv(content, "beta_env", name, *r.beta_env);
    }
  } else {
    throw InputError("unknown format: " + config.format);
  }

  write_output(config, content);
  std::cerr << "select: done in " << std::chrono::duration<double>(Clock::now() - start).count()
            << " s\n";
  return 0;
}

namespace {

EnvelopeBasis basis_at_dimension(const MomentPair& mp, int k, const RunConfig& config) {
  const int p = mp.dim();
  if (k == 0) return EnvelopeBasis(p);
  if (k == p) return EnvelopeBasis(Matrix(Matrix::Identity(p, p)));
  OptimizerSettings os;
  os.seed = config.seed;
  if (config.criterion == "fg") {
    return solve_grassmann(mp, k, std::nullopt, os);
  }
  return run_1d_algorithm(mp, k, os).prefix(k);
}

struct SplitData {
  RegressionData train;
  RegressionData test;
};

SplitData split_data(const RegressionData& data, double fraction, std::uint64_t seed) {
  const int n = data.n();
  const int n_test = std::max(1, static_cast<int>(std::lround(fraction * n)));
  if (n - n_test <= std::max(data.p(), data.q()) + 1) {
    throw InputError("--split leaves too few training rows");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::substream(seed, 0x5e117);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  auto take = [&](int from, int count) {
    Matrix x(count, data.q()), y(count, data.p());
    Eigen::VectorXi ev(count);
    for (int i = 0; i < count; ++i) {
      const int idx = order[from + i];
      x.row(i) = data.x.row(idx);
      y.row(i) = data.y.row(idx);
      if (data.censoring) ev(i) = (*data.censoring)(idx);
    }
    return RegressionData(std::move(x), std::move(y),
                          data.censoring ? std::optional<Eigen::VectorXi>(ev) : std::nullopt);
  };
  return SplitData{take(n_test, n - n_test), take(0, n_test)};
}

}  // namespace

double holdout_metric(const std::string& family, const RegressionData& train,
                      const RegressionData& test, const EnvelopeBasis& basis,
                      const std::vector<int>& x1_cols) {
  if (family == "response") {
    const StandardFit fit = standard_linear_fit(train);
    const Matrix beta_env = basis.projector() * fit.beta_hat;
    const Matrix pred = (test.x.rowwise() - fit.x_mean.transpose()) * beta_env.transpose();
    const Matrix truth = test.y.rowwise() - fit.y_mean.transpose();
    return (truth - pred).squaredNorm() / test.n();
  }
  if (family == "predictor" || family == "partial") {
    // Reduced-predictor regression: coefficients through the envelope of X
    // (all of X for the predictor family, the X1 block for the partial one).
    const Matrix xc = train.x.rowwise() - train.x.colwise().mean();
    const Matrix yc = train.y.rowwise() - train.y.colwise().mean();
    Matrix beta;  // q x p
    if (family == "predictor") {
      if (basis.k() == 0) {
        beta = Matrix::Zero(train.q(), train.p());
      } else {
        const Matrix z = xc * basis.gamma();
        const Matrix coef = (z.transpose() * z).ldlt().solve(z.transpose() * yc);
        beta = basis.gamma() * coef;
      }
    } else {
      std::vector<bool> in_x1(train.q(), false);
      for (int c : x1_cols) in_x1[c] = true;
      Matrix reduced(train.n(), train.q());
      int j1 = 0;
      std::vector<int> col_map(train.q());
      for (int c = 0; c < train.q(); ++c) {
        if (in_x1[c]) col_map[c] = j1++;
      }
      const int q1 = j1;
      // X1 block passes through the envelope basis, X2 enters unreduced.
      Matrix x1(train.n(), q1), x2(train.n(), train.q() - q1);
      int a = 0, b = 0;
      for (int c = 0; c < train.q(); ++c) {
        if (in_x1[c])
          x1.col(a++) = xc.col(c);
        else
          x2.col(b++) = xc.col(c);
      }
      Matrix design(train.n(), basis.k() + x2.cols());
      design.leftCols(basis.k()) = x1 * basis.gamma();
      design.rightCols(x2.cols()) = x2;
      const Matrix coef = (design.transpose() * design).ldlt().solve(design.transpose() * yc);
      Matrix beta1 = basis.gamma() * coef.topRows(basis.k());
      Matrix beta2 = coef.bottomRows(x2.cols());
      beta = Matrix(train.q(), train.p());
      a = 0;
      b = 0;
      for (int c = 0; c < train.q(); ++c) {
        beta.row(c) = in_x1[c] ? beta1.row(a++) : beta2.row(b++);
      }
      (void)reduced;
    }
    const Matrix pred = (test.x.rowwise() - train.x.colwise().mean()) * beta;
    const Matrix truth = test.y.rowwise() - train.y.colwise().mean();
    return (truth - pred).squaredNorm() / test.n();
  }
  if (family == "glm") {
    const StandardFit fit = standard_logistic_fit(train);
    const Vector beta_env = (basis.projector() * fit.beta_hat).col(0);
    int wrong = 0;
    for (int i = 0; i < test.n(); ++i) {
      const double eta = fit.intercept + test.x.row(i).dot(beta_env);
      const double label = eta > 0.0 ? 1.0 : 0.0;
      if (label != test.y(i, 0)) ++wrong;
    }
    return static_cast<double>(wrong) / test.n();
  }
  if (family == "cox") {
    const StandardFit fit = standard_cox_fit(train);
    const Vector beta_env = (basis.projector() * fit.beta_hat).col(0);
    const CoxEval eval = cox_partial_loglik(beta_env, test);
    const int events = test.censoring ? test.censoring->sum() : 0;
    return events > 0 ? -eval.loglik / events : 0.0;
  }
  throw InputError("holdout evaluation is not defined for family: " + family);
}

int run_fit(const RunConfig& config) {
  const auto start = Clock::now();
  const LoadedProblem problem = load_problem(config);
  const MomentPair& mp = problem.mp;
  if (config.dim < 0 || config.dim > mp.dim()) {
    throw InputError("--dim must be between 0 and p");
  }

  std::optional<double> metric;
  EnvelopeBasis basis(mp.dim());
  if (config.split > 0.0) {
    if (config.family == "generic") {
      throw InputError("--split requires a data CSV, not generic matrices");
    }
    if (config.split >= 1.0) throw InputError("--split must be in (0, 1)");
    const SplitData split = split_data(*problem.data, config.split, config.seed);
    MomentPair train_mp = [&] {
      if (config.family == "response") return response_envelope_moments(split.train);
      if (config.family == "predictor") return predictor_envelope_moments(split.train);
      if (config.family == "partial")
        return partial_envelope_moments(split.train, problem.x1_cols);
      if (config.family == "glm")
        return glm_envelope_moments(split.train, config.glm_weighting == "unweighted"
                                                     ? GlmWeighting::Unweighted
                                                     : GlmWeighting::Weighted);
      return cox_envelope_moments(split.train);
    }();
    const EnvelopeBasis train_basis = basis_at_dimension(train_mp, config.dim, config);
    metric = holdout_metric(config.family, split.train, split.test, train_basis, problem.x1_cols);
  }
  basis = basis_at_dimension(mp, config.dim, config);
  const EnvelopeFit fit = envelope_fit_from_basis(basis, mp);
  const auto beta_env = beta_envelope(problem, fit.basis);

  std::string content;
  if (config.format == "json") {
    JsonValue doc = JsonValue::object();
    doc.set("schema_version", 1);
    doc.set("command", "fit");
    doc.set("family", config.family);
    doc.set("n", mp.n());
    doc.set("p", mp.dim());
    doc.set("q", mp.q());
    doc.set("dim", config.dim);
    doc.set("seed", config.seed);
    doc.set("fit", fit_to_json(fit, beta_env));
    if (metric) {
      doc.set("holdout_fraction", config.split);
      doc.set("holdout_metric", *metric);
    }
    content = doc.dump();
    content += '\n';
  } else if (config.format == "csv") {
    content = "section,criterion,i,j,value\n";
    append_matrix_csv(content, "gamma", config.criterion, fit.basis.gamma());
    if (fit.theta_env) append_matrix_csv(content, "theta_env", config.criterion, *fit.theta_env);
    if (beta_env) append_matrix_csv(content, "beta_env", config.criterion, *beta_env);
    if (metric) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "holdout_metric,%s,0,0,%.17g\n", config.criterion.c_str(),
                    *metric);
      content += buf;
    }
  } else {
    throw InputError("unknown format: " + config.format);
  }

  write_output(config, content);
  std::cerr << "fit: done in " << std::chrono::duration<double>(Clock::now() - start).count()
            << " s\n";
  return 0;
}

int run_simulate(const RunConfig& config) {
  const auto start = Clock::now();
  Table table;
  if (config.table == "T2") {
    table = Table::T2;
  } else if (config.table == "T3") {
    table = Table::T3;
  } else if (config.table == "T4") {
    table = Table::T4;
  } else {
    throw InputError("--table must be one of T2, T3, T4");
  }
  if (config.replicates < 1) throw InputError("--replicates must be positive");
  const McReport report =
      run_table(table, config.replicates, config.seed, std::max(1, config.threads));

  std::string content;
  if (config.format == "csv") {
    content = report.to_csv();
  } else if (config.format == "json") {
    JsonValue doc = JsonValue::object();
    doc.set("schema_version", 1);
    doc.set("command", "simulate");
    doc.set("table", report.table);
    doc.set("replicates", config.replicates);
    doc.set("seed", config.seed);
    JsonValue& rows = doc.set("rows", JsonValue::array());
    for (const auto& r : report.rows) {
      JsonValue row = JsonValue::object();
      row.set("scenario", r.scenario);
      row.set("method", r.method);
      row.set("n", r.n);
      row.set("constant_c", r.constant_c);
      row.set("replicates", r.replicates);
      row.set("true_u", r.true_u);
      row.set("correct", r.correct);
      row.set("correct_pct", r.correct_pct());
      row.set("mean_selected", r.mean_selected);
      JsonValue freq = JsonValue::array();
      for (int f : r.freq) freq.push(JsonValue(f));
      row.set("frequencies", std::move(freq));
      if (r.err_standard) {
        row.set("err_standard_mean", r.err_standard->mean);
        row.set("err_standard_se", r.err_standard->se);
      }
      if (r.err_true_u) {
        row.set("err_true_mean", r.err_true_u->mean);
        row.set("err_true_se", r.err_true_u->se);
      }
      if (r.err_selected) {
        row.set("err_selected_mean", r.err_selected->mean);
        row.set("err_selected_se", r.err_selected->se);
      }
      rows.push(std::move(row));
    }
    content = doc.dump();
    content += '\n';
  } else {
    throw InputError("unknown format: " + config.format);
  }

  write_output(config, content);
  std::cerr << report.to_text();
  std::cerr << "simulate: done in " << std::chrono::duration<double>(Clock::now() - start).count()
            << " s\n";
  return 0;
}

int dispatch(const RunConfig& config) {
  try {
    if (config.command == "select") return run_select(config);
    if (config.command == "fit") return run_fit(config);
    if (config.command == "simulate") return run_simulate(config);
    throw InputError("unknown command: " + config.command);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace envelope::cli
