#pragma once

#include <optional>
#include <string>
#include <vector>

#include "envelope/types.hpp"

namespace envelope::cli {

// Parsed regression CSV. Header row is required: columns prefixed y_ are
// responses, x_ predictors, an optional column named "event" carries Cox
// censoring flags (1 = observed). Predictors named x1_* / x2_* additionally
// mark the partial-envelope split.
struct Dataset {
  Matrix x;
  Matrix y;
  std::optional<Eigen::VectorXi> event;
  std::vector<int> x1_cols;  // indices into x of columns named x1_*
  bool has_partial_markers = false;
};

Dataset read_data_csv(const std::string& path);

// Generic-family CSV: header "matrix,c1,...,cp", then p rows labelled m and
// p rows labelled u.
struct GenericMatrices {
  Matrix m;
  Matrix u;
};
GenericMatrices read_generic_csv(const std::string& path);

}  // namespace envelope::cli
