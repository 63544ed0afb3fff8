#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "envelope/linalg.hpp"

namespace envelope {

// Malformed user input: dimension mismatches, bad files, degenerate data.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: loss of definiteness, separation, failed factorization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Symmetric positive definite matrix. Construction validates symmetry
// (1e-12 relative), strict positivity of the spectrum, and rejects
// condition numbers above 1e12 instead of regularizing.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
};

// Symmetric positive semidefinite matrix; eigenvalues may dip below zero
// only within rounding of the matrix scale. The zero matrix is valid.
class PsdMatrix {
 public:
  explicit PsdMatrix(Matrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
};

// The pair (M-hat, U-hat) with sample size n, the sole input to envelope
// estimation and dimension selection. theta_hat, when present, must satisfy
// U-hat = theta_hat * theta_hat' so that the quasi-likelihood identities
// hold; moment constructors scale the coefficient estimate accordingly.
class MomentPair {
 public:
  MomentPair(SpdMatrix m_hat, PsdMatrix u_hat, int n);
  MomentPair(SpdMatrix m_hat, PsdMatrix u_hat, int n, Matrix theta_hat);

  int dim() const { return m_hat_.dim(); }
  int n() const { return n_; }
  const Matrix& m_hat() const { return m_hat_.entries(); }
  const Matrix& u_hat() const { return u_hat_.entries(); }
  const std::optional<Matrix>& theta_hat() const { return theta_hat_; }
  // Column count of theta; 0 when no standard estimator is attached.
  int q() const { return theta_hat_ ? static_cast<int>(theta_hat_->cols()) : 0; }

  Matrix m_plus_u() const { return m_hat_.entries() + u_hat_.entries(); }

 private:
  SpdMatrix m_hat_;
  PsdMatrix u_hat_;
  int n_;
  std::optional<Matrix> theta_hat_;
};

// Semi-orthogonal p x k basis, a point on the Grassmannian Gr(p, k).
// k = 0 is the empty basis.
class EnvelopeBasis {
 public:
  EnvelopeBasis() : p_(1), gamma_(1, 0) {}  // trivial placeholder basis
  explicit EnvelopeBasis(int p);             // empty basis, k = 0
  explicit EnvelopeBasis(Matrix gamma);

  int p() const { return p_; }
  int k() const { return static_cast<int>(gamma_.cols()); }
  const Matrix& gamma() const { return gamma_; }
  Matrix projector() const { return gamma_ * gamma_.transpose(); }

 private:
  int p_;
  Matrix gamma_;
};

// Plug-in envelope estimators at a fixed basis. The theta-dependent fields
// are absent when the MomentPair carries no standard estimator.
struct EnvelopeFit {
  EnvelopeBasis basis;
  std::optional<Matrix> eta_hat;    // k x q
  std::optional<Matrix> theta_env;  // p x q
  Matrix omega_hat;                 // k x k
  Matrix omega0_hat;                // (p-k) x (p-k)
  Matrix m_env;                     // p x p
  double objective = 0.0;
};

// Nested path of unit directions from the sequential 1D minimization,
// with the per-step objective values.
struct OneDPath {
  int p = 0;
  Matrix directions;               // p x m, orthonormal columns
  std::vector<double> step_values; // m entries

  int steps() const { return static_cast<int>(directions.cols()); }
  EnvelopeBasis prefix(int k) const;
};

enum class Method { OneD, FG };

inline const char* method_name(Method m) { return m == Method::OneD ? "1d" : "fg"; }

// Criterion values over k = 0..kmax and the selected dimension
// (smallest index attaining the minimum).
struct SelectionResult {
  std::vector<double> criterion_values;
  int selected_u = 0;
  double constant_c = 1.0;
  Method method = Method::OneD;
};

}  // namespace envelope
