#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "envelope/moments.hpp"
#include "envelope/optimize.hpp"
#include "envelope/rng.hpp"
#include "envelope/types.hpp"

namespace envelope {

// Deterministic combination of a base seed with stream labels.
inline std::uint64_t seed_chain(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t s = seed ^ 0x243f6a8885a308d3ULL;
  for (std::uint64_t v : parts) {
    std::uint64_t t = s ^ (v + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2));
    s = splitmix64(t);
  }
  return s;
}

enum class GenericModel { I, II, III };
enum class RegModel { Linear, Logistic, Cox };
enum class Table { T2, T3, T4 };

const char* generic_model_name(GenericModel m);
const char* reg_model_name(RegModel m);

// Envelope-structured population (M, U) = (G Omega G' + G0 Omega0 G0', G Phi G').
struct GenericEnvelopeSpec {
  int p = 0;
  int u = 0;
  GenericModel model = GenericModel::I;
  EnvelopeBasis gamma;
  Matrix omega;   // u x u
  Matrix omega0;  // (p-u) x (p-u)
  Matrix phi;     // u x u

  Matrix m() const;
  Matrix u_mat() const;
};

// Orthonormalized standard-Gaussian draw; Haar-distributed column span.
EnvelopeBasis random_semiorthogonal(int p, int k, Rng& rng);

// Bartlett-decomposition Wishart draw, E[W] = dof * scale. Requires dof >= p.
SpdMatrix sample_wishart(const SpdMatrix& scale, int dof, Rng& rng);

// Wishart draw for a possibly rank-deficient PSD scale: with scale = B B',
// returns B W B' where W ~ W_r(I, dof) and r = rank(scale). The result is
// PSD with the same span as the scale.
Matrix sample_wishart_psd(const Matrix& scale, int dof, Rng& rng);

GenericEnvelopeSpec gen_generic(GenericModel model, int p, int u, Rng& rng);

// Regression populations with the envelope structure: p = 10, u = 2,
// eta all ones (0.2 for Cox), Omega eigenvalues {1, 5}, Omega0 eigenvalues
// exp(-4)..exp(3) (0.1 I for Cox).
struct RegressionPopulation {
  RegModel model = RegModel::Linear;
  int p = 10;
  int u = 2;
  int q = 1;
  EnvelopeBasis gamma;
  Matrix sigma;  // error covariance (linear) or predictor covariance
  Matrix beta;   // p x q, equals gamma * eta
};

RegressionPopulation gen_reg_population(RegModel model, int q, Rng& rng);
RegressionData sample_regression(const RegressionPopulation& pop, int n, Rng& rng);

struct RegressionSim {
  RegressionData data;
  Matrix beta_true;
  EnvelopeBasis gamma;
};
RegressionSim gen_regression(RegModel model, int n, Rng& rng, int q = 1);

// Monte Carlo reporting -----------------------------------------------------

struct ErrStats {
  double mean = 0.0;
  double se = 0.0;
};

struct ScenarioRow {
  std::string table;
  std::string scenario;
  std::string method;  // "1d" or "fg"
  int n = 0;
  double constant_c = 1.0;
  int replicates = 0;
  int true_u = 0;
  std::vector<int> freq;  // selected-dimension counts, index 0..kmax
  int correct = 0;
  double mean_selected = 0.0;
  std::optional<ErrStats> err_standard;
  std::optional<ErrStats> err_true_u;
  std::optional<ErrStats> err_selected;
  double seconds = 0.0;

  double correct_pct() const {
    return replicates > 0 ? 100.0 * correct / replicates : 0.0;
  }
};

struct McReport {
  std::string table;
  std::vector<ScenarioRow> rows;

  std::string to_csv() const;   // fixed header, one row per scenario x n x method
  std::string to_text() const;  // aligned human-readable table
};

// Desk-scale scenario runners; run_table composes these into full tables.
std::vector<ScenarioRow> run_t2_scenario(GenericModel model, int n, int replicates,
                                         std::uint64_t seed, int threads, bool with_fg,
                                         const OptimizerSettings& settings, int fg_kmax = -1);
std::vector<ScenarioRow> run_t3_scenario(RegModel model, int n, int replicates,
                                         std::uint64_t seed, int threads, bool with_fg,
                                         const OptimizerSettings& settings);
std::vector<ScenarioRow> run_t4_scenario(int n, int replicates, std::uint64_t seed, int threads,
                                         const std::vector<double>& c_grid,
                                         const OptimizerSettings& settings);

McReport run_table(Table table, int replicates, std::uint64_t seed, int threads = 1);

}  // namespace envelope
