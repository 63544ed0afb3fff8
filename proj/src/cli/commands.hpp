#pragma once

#include <cstdint>
#include <string>

#include "envelope/moments.hpp"
#include "envelope/types.hpp"

namespace envelope::cli {

struct RunConfig {
  std::string command;                  // select | fit | simulate
  std::string family = "response";      // response|predictor|partial|glm|cox|generic
  std::string criterion = "1d";         // 1d|fg|both
  double constant_c = 1.0;
  int kmax = -1;
  int dim = -1;                         // fit only
  std::uint64_t seed = 0;
  int replicates = 200;
  std::string table;                    // T2|T3|T4
  std::string input;
  std::string output;                   // empty: stdout
  std::string format = "json";          // json|csv
  double split = 0.0;                   // held-out fraction for fit
  int n_value = 0;                      // generic family sample size
  std::string glm_weighting = "weighted";
  int threads = 1;
};

int run_select(const RunConfig& config);
int run_fit(const RunConfig& config);
int run_simulate(const RunConfig& config);

// Maps exceptions to the documented exit codes: 1 usage/input, 2 numerical.
int dispatch(const RunConfig& config);

// Family-specific held-out prediction error for a fitted basis: mean squared
// prediction error (linear families), misclassification rate (glm), or
// per-event negative log partial likelihood (cox).
double holdout_metric(const std::string& family, const RegressionData& train,
                      const RegressionData& test, const EnvelopeBasis& basis,
                      const std::vector<int>& x1_cols = {});

}  // namespace envelope::cli
