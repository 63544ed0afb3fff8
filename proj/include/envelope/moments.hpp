#pragma once

#include <optional>
#include <vector>

#include "envelope/types.hpp"

namespace envelope {

// Regression sample. y may be multivariate (response envelopes) or a single
// binary/survival column. censoring flags are Cox-only, 1 = observed event.
struct RegressionData {
  Matrix x;  // n x q
  Matrix y;  // n x p
  std::optional<Eigen::VectorXi> censoring;

  RegressionData(Matrix x_in, Matrix y_in,
                 std::optional<Eigen::VectorXi> censoring_in = std::nullopt);

  int n() const { return static_cast<int>(x.rows()); }
  int q() const { return static_cast<int>(x.cols()); }
  int p() const { return static_cast<int>(y.cols()); }
};

enum class Family { Linear, Logistic, Cox };

// A standard root-n consistent estimator. asymptotic_cov estimates the
// asymptotic covariance of sqrt(n) (beta_hat - beta) where available
// (logistic and Cox: inverse information times n; linear with q = 1:
// residual covariance over the predictor variance).
struct StandardFit {
  Matrix beta_hat;  // p x q (linear), q x 1 (logistic / Cox)
  std::optional<Matrix> asymptotic_cov;
  Family family = Family::Linear;
  double intercept = 0.0;          // logistic only
  Vector x_mean, y_mean;
};

StandardFit standard_linear_fit(const RegressionData& data);
StandardFit standard_logistic_fit(const RegressionData& data);
StandardFit standard_cox_fit(const RegressionData& data);

// Log partial likelihood with Breslow tie handling, plus score and observed
// information at beta.
struct CoxEval {
  double loglik = 0.0;
  Vector score;
  Matrix info;
};
CoxEval cox_partial_loglik(const Vector& beta, const RegressionData& data);

// Table-1 moment constructors. Each returns (M, U, n, theta) with
// U = theta * theta' exact by construction.
MomentPair response_envelope_moments(const RegressionData& data);
MomentPair predictor_envelope_moments(const RegressionData& data);
MomentPair partial_envelope_moments(const RegressionData& data, const std::vector<int>& x1_cols);

enum class GlmWeighting { Weighted, Unweighted };
MomentPair glm_envelope_moments(const RegressionData& data, GlmWeighting weighting);

MomentPair cox_envelope_moments(const RegressionData& data);

}  // namespace envelope
