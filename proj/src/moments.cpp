#include "envelope/moments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace envelope {

namespace {

Matrix center_columns(const Matrix& a) {
  return a.rowwise() - a.colwise().mean();
}

// Sample covariance with divisor n, so the decomposition identities of the
// moment constructors hold exactly.
Matrix cov_n(const Matrix& centered) {
  return (centered.transpose() * centered) / static_cast<double>(centered.rows());
}

void check_full_rank(const Matrix& gram, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0 || lo < 1e-12 * hi) {
    throw NumericalError(std::string(what) + ": rank-deficient design");
  }
}

// Least squares of yc on xc (both centered): returns the q x p coefficient
// block solving the normal equations.
Matrix ls_solve(const Matrix& xc, const Matrix& yc, const char* what) {
  const Matrix gram = xc.transpose() * xc;
  check_full_rank(gram, what);
  return gram.ldlt().solve(xc.transpose() * yc);
}

double inv_logit(double eta) {
  return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

void check_binary(const Matrix& y, const char* what) {
  if (y.cols() != 1) throw InputError(std::string(what) + ": response must be a single column");
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (y(i, 0) != 0.0 && y(i, 0) != 1.0) {
      throw InputError(std::string(what) + ": response values must be 0 or 1");
    }
  }
}

}  // namespace

RegressionData::RegressionData(Matrix x_in, Matrix y_in,
                               std::optional<Eigen::VectorXi> censoring_in)
    : x(std::move(x_in)), y(std::move(y_in)), censoring(std::move(censoring_in)) {
  if (x.rows() != y.rows()) throw InputError("RegressionData: row counts differ");
  if (x.cols() < 1 || y.cols() < 1) throw InputError("RegressionData: empty design");
  if (n() <= std::max(p(), q()) + 1) {
    throw InputError("RegressionData: need n > max(p, q) + 1");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw InputError("RegressionData: non-finite entries");
  }
  if (censoring) {
    if (censoring->size() != x.rows()) {
      throw InputError("RegressionData: censoring length differs from n");
    }
    for (Eigen::Index i = 0; i < censoring->size(); ++i) {
      const int f = (*censoring)(i);
      if (f != 0 && f != 1) throw InputError("RegressionData: censoring flags must be 0 or 1");
    }
  }
}

StandardFit standard_linear_fit(const RegressionData& data) {
  const Matrix xc = center_columns(data.x);
  const Matrix yc = center_columns(data.y);
  const Matrix coef = ls_solve(xc, yc, "standard_linear_fit");  // q x p
  StandardFit fit;
  fit.family = Family::Linear;
  fit.beta_hat = coef.transpose();  // p x q
  fit.x_mean = data.x.colwise().mean();
  fit.y_mean = data.y.colwise().mean();
  if (data.q() == 1) {
    const Matrix resid = yc - xc * coef;
    const double sx2 = xc.squaredNorm() / data.n();
    fit.asymptotic_cov = cov_n(resid) / sx2;
  }
  return fit;
}

StandardFit standard_logistic_fit(const RegressionData& data) {
  check_binary(data.y, "standard_logistic_fit");
  const int n = data.n();
  const int q = data.q();
  Matrix design(n, q + 1);
  design.col(0).setOnes();
  design.rightCols(q) = data.x;
  const Vector y = data.y.col(0);

  Vector beta = Vector::Zero(q + 1);
  constexpr int kMaxIter = 100;
  constexpr double kGradTol = 1e-8;
  // |eta| beyond this means fitted probabilities at 0/1 to double precision:
  // the likelihood is maximized at infinity along some direction.
  constexpr double kSeparationEta = 30.0;
  Matrix hessian(q + 1, q + 1);
  bool converged = false;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const Vector eta = design * beta;
    if (eta.cwiseAbs().maxCoeff() > kSeparationEta) {
      throw NumericalError("standard_logistic_fit: diverging coefficients indicate separation");
    }
    Vector pi(n), w(n);
    for (int i = 0; i < n; ++i) {
      pi(i) = inv_logit(eta(i));
      w(i) = pi(i) * (1.0 - pi(i));
    }
    const Vector grad = design.transpose() * (y - pi);
    if (grad.cwiseAbs().maxCoeff() <= kGradTol) {
      converged = true;
      break;
    }
    hessian = design.transpose() * w.asDiagonal() * design;
    Eigen::LDLT<Matrix> ldlt(hessian);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError("standard_logistic_fit: information matrix is singular");
    }
    beta += ldlt.solve(grad);
  }
  if (!converged) {
    const Vector eta = design * beta;
    Vector pi(n);
    for (int i = 0; i < n; ++i) pi(i) = inv_logit(eta(i));
    if ((design.transpose() * (y - pi)).cwiseAbs().maxCoeff() > kGradTol) {
      throw NumericalError("standard_logistic_fit: IRLS did not converge");
    }
  }

  // Final information at the solution; the beta block of its inverse scaled
  // by n estimates avar(sqrt(n) beta_hat).
  {
    const Vector eta = design * beta;
    Vector w(n);
    for (int i = 0; i < n; ++i) {
      const double pi = inv_logit(eta(i));
      w(i) = pi * (1.0 - pi);
    }
    hessian = design.transpose() * w.asDiagonal() * design;
  }
  check_full_rank(hessian, "standard_logistic_fit");
  const Matrix cov_full = hessian.ldlt().solve(Matrix::Identity(q + 1, q + 1));

  StandardFit fit;
  fit.family = Family::Logistic;
  fit.intercept = beta(0);
  fit.beta_hat = beta.tail(q);
  fit.asymptotic_cov = symmetrize(static_cast<double>(n) * cov_full.bottomRightCorner(q, q));
  fit.x_mean = data.x.colwise().mean();
  fit.y_mean = data.y.colwise().mean();
  return fit;
}

CoxEval cox_partial_loglik(const Vector& beta, const RegressionData& data) {
  if (!data.censoring) throw InputError("cox_partial_loglik: censoring flags required");
  if (beta.size() != data.q()) throw InputError("cox_partial_loglik: beta has wrong length");
  const int n = data.n();
  const int q = data.q();
  const Vector time = data.y.col(0);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return time(a) > time(b); });

  CoxEval eval;
  eval.score = Vector::Zero(q);
  eval.info = Matrix::Zero(q, q);

  // Accumulate risk-set sums from the largest time downward; tied times
  // enter the risk set together before their events are processed (Breslow).
  double s0 = 0.0;
  Vector s1 = Vector::Zero(q);
  Matrix s2 = Matrix::Zero(q, q);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && time(order[j]) == time(order[i])) ++j;
    for (int r = i; r < j; ++r) {
      const int idx = order[r];
      const Vector xi = data.x.row(idx);
      const double wexp = std::exp(beta.dot(xi));
      s0 += wexp;
      s1 += wexp * xi;
      s2 += wexp * xi * xi.transpose();
    }
    for (int r = i; r < j; ++r) {
      const int idx = order[r];
      if ((*data.censoring)(idx) != 1) continue;
      const Vector xi = data.x.row(idx);
      const Vector mean = s1 / s0;
      eval.loglik += beta.dot(xi) - std::log(s0);
      eval.score += xi - mean;
      eval.info += s2 / s0 - mean * mean.transpose();
    }
    i = j;
  }
  return eval;
}

StandardFit standard_cox_fit(const RegressionData& data) {
  if (!data.censoring) throw InputError("standard_cox_fit: censoring flags required");
  const int events = data.censoring->sum();
  if (events < 1) throw InputError("standard_cox_fit: no observed events");
  const int q = data.q();

  Vector beta = Vector::Zero(q);
  CoxEval eval = cox_partial_loglik(beta, data);
  constexpr int kMaxIter = 100;
  constexpr double kGradTol = 1e-8;
  bool converged = false;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    if (eval.score.cwiseAbs().maxCoeff() <= kGradTol) {
      converged = true;
      break;
    }
    Eigen::LLT<Matrix> llt(eval.info);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("standard_cox_fit: observed information is not positive definite");
    }
    const Vector direction = llt.solve(eval.score);
    double step = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h) {
      const Vector cand = beta + step * direction;
      const CoxEval cand_eval = cox_partial_loglik(cand, data);
      if (cand_eval.loglik > eval.loglik || cand_eval.score.cwiseAbs().maxCoeff() <= kGradTol) {
        beta = cand;
        eval = cand_eval;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      throw NumericalError("standard_cox_fit: Newton step failed to increase the partial likelihood");
    }
  }
  if (!converged && eval.score.cwiseAbs().maxCoeff() > kGradTol) {
    throw NumericalError("standard_cox_fit: Newton did not converge");
  }
  Eigen::LLT<Matrix> llt(eval.info);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("standard_cox_fit: observed information is not positive definite");
  }

  StandardFit fit;
  fit.family = Family::Cox;
  fit.beta_hat = beta;
  fit.asymptotic_cov =
      symmetrize(static_cast<double>(data.n()) * llt.solve(Matrix::Identity(q, q)));
  fit.x_mean = data.x.colwise().mean();
  fit.y_mean = data.y.colwise().mean();
  return fit;
}

MomentPair response_envelope_moments(const RegressionData& data) {
  const Matrix xc = center_columns(data.x);
  const Matrix yc = center_columns(data.y);
  const Matrix coef = ls_solve(xc, yc, "response_envelope_moments");
  const Matrix resid = yc - xc * coef;
  const Matrix s_y_given_x = cov_n(resid);
  const Matrix u = cov_n(yc) - s_y_given_x;
  const Matrix theta = coef.transpose() * psd_sqrt(cov_n(xc));
  return MomentPair(SpdMatrix(s_y_given_x), PsdMatrix(u), data.n(), theta);
}

MomentPair predictor_envelope_moments(const RegressionData& data) {
  const Matrix xc = center_columns(data.x);
  const Matrix yc = center_columns(data.y);
  const Matrix coef = ls_solve(yc, xc, "predictor_envelope_moments");  // p x q
  const Matrix resid = xc - yc * coef;
  const Matrix s_x_given_y = cov_n(resid);
  const Matrix u = cov_n(xc) - s_x_given_y;
  const Matrix theta = coef.transpose() * psd_sqrt(cov_n(yc));
  return MomentPair(SpdMatrix(s_x_given_y), PsdMatrix(u), data.n(), theta);
}

MomentPair partial_envelope_moments(const RegressionData& data, const std::vector<int>& x1_cols) {
  const int q = data.q();
  if (x1_cols.empty() || static_cast<int>(x1_cols.size()) >= q) {
    throw InputError("partial_envelope_moments: X1 must be a nonempty proper subset of the predictors");
  }
  std::vector<bool> in_x1(q, false);
  for (int c : x1_cols) {
    if (c < 0 || c >= q) throw InputError("partial_envelope_moments: X1 column index out of range");
    if (in_x1[c]) throw InputError("partial_envelope_moments: duplicate X1 column");
    in_x1[c] = true;
  }
  const int q1 = static_cast<int>(x1_cols.size());
  Matrix x1(data.n(), q1), x2(data.n(), q - q1);
  {
    int j1 = 0, j2 = 0;
    for (int c = 0; c < q; ++c) {
      if (in_x1[c])
        x1.col(j1++) = data.x.col(c);
      else
        x2.col(j2++) = data.x.col(c);
    }
  }

  const Matrix yc = center_columns(data.y);
  const Matrix x1c = center_columns(x1);
  const Matrix x2c = center_columns(x2);

  // Full regression on (X1, X2); S_{Y|X2} from the reduced regression.
  Matrix xc(data.n(), q);
  xc.leftCols(q1) = x1c;
  xc.rightCols(q - q1) = x2c;
  const Matrix coef_full = ls_solve(xc, yc, "partial_envelope_moments");
  const Matrix s_y_given_x = cov_n(Matrix(yc - xc * coef_full));
  const Matrix coef_x2 = ls_solve(x2c, yc, "partial_envelope_moments");
  const Matrix s_y_given_x2 = cov_n(Matrix(yc - x2c * coef_x2));
  const Matrix u = s_y_given_x2 - s_y_given_x;

  const Matrix beta1 = coef_full.topRows(q1).transpose();  // p x q1
  const Matrix x1_resid = x1c - x2c * ls_solve(x2c, x1c, "partial_envelope_moments");
  const Matrix theta = beta1 * psd_sqrt(cov_n(x1_resid));
  return MomentPair(SpdMatrix(s_y_given_x), PsdMatrix(u), data.n(), theta);
}

MomentPair glm_envelope_moments(const RegressionData& data, GlmWeighting weighting) {
  const StandardFit fit = standard_logistic_fit(data);
  const int n = data.n();
  const Vector eta = (data.x * fit.beta_hat).col(0).array() + fit.intercept;
  Vector w(n), resid(n);
  for (int i = 0; i < n; ++i) {
    const double pi = inv_logit(eta(i));
    w(i) = pi * (1.0 - pi);
    resid(i) = data.y(i, 0) - pi;
  }
  const double wsum = w.sum();
  if (wsum <= 0.0) throw NumericalError("glm_envelope_moments: degenerate fitted weights");
  const Vector xw_mean = (data.x.transpose() * w) / wsum;
  const Matrix xw_centered = data.x.rowwise() - xw_mean.transpose();
  const Matrix s_xw =
      (xw_centered.transpose() * w.asDiagonal() * xw_centered) / wsum;

  const Matrix m = weighting == GlmWeighting::Weighted ? s_xw : cov_n(center_columns(data.x));
  const Vector beta = fit.beta_hat.col(0);
  // Weighted predictor-envelope form on the IRLS working response
  // z = eta + (y - pi)/w: at the MLE the weighted covariance of (X, z) is
  // S_X(W) beta, and the weighted variance of z splits into the index part
  // and the residual part below. U = cov(X,z) var(z)^{-1} cov(z,X) then has
  // rank one with the envelope of beta as its span.
  const double s_index = beta.dot(s_xw * beta);
  double s_resid = 0.0;
  for (int i = 0; i < n; ++i) s_resid += resid(i) * resid(i) / std::max(w(i), 1e-12);
  s_resid /= wsum;
  const Vector theta = (s_xw * beta) / std::sqrt(s_index + s_resid);
  const Matrix u = theta * theta.transpose();
  return MomentPair(SpdMatrix(m), PsdMatrix(u), n, theta);
}

MomentPair cox_envelope_moments(const RegressionData& data) {
  const StandardFit fit = standard_cox_fit(data);
  const Vector beta = fit.beta_hat.col(0);
  const Matrix u = beta * beta.transpose();
  return MomentPair(SpdMatrix(*fit.asymptotic_cov), PsdMatrix(u), data.n(), beta);
}

}  // namespace envelope
