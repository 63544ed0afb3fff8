#include "csv_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace envelope::cli {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    fields.push_back(field.substr(start));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_number(const std::string& s, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw InputError("CSV line " + std::to_string(line_no) + ": cannot parse value '" + s + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
      lines.push_back(line);
    }
  }
  if (lines.size() < 2) throw InputError("CSV has no data rows: " + path);
  return lines;
}

bool has_prefix(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

}  // namespace

Dataset read_data_csv(const std::string& path) {
  const auto lines = read_lines(path);
  const auto header = split_line(lines[0]);
  std::vector<int> y_cols, x_cols;
  int event_col = -1;
  std::vector<bool> is_x1;
  bool saw_partial = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (has_prefix(name, "y_")) {
      y_cols.push_back(static_cast<int>(c));
    } else if (has_prefix(name, "x1_") || has_prefix(name, "x2_")) {
      saw_partial = true;
      x_cols.push_back(static_cast<int>(c));
      is_x1.push_back(has_prefix(name, "x1_"));
    } else if (has_prefix(name, "x_")) {
      x_cols.push_back(static_cast<int>(c));
      is_x1.push_back(false);
    } else if (name == "event") {
      event_col = static_cast<int>(c);
    } else {
      throw InputError("CSV header: unrecognized column '" + name +
                       "' (expected y_*, x_*, x1_*, x2_* or event)");
    }
  }
  if (y_cols.empty() || x_cols.empty()) {
    throw InputError("CSV header must contain at least one y_ and one x_ column");
  }

  const int n = static_cast<int>(lines.size()) - 1;
  Dataset out;
  out.x = Matrix(n, static_cast<int>(x_cols.size()));
  out.y = Matrix(n, static_cast<int>(y_cols.size()));
  Eigen::VectorXi event(n);
  for (int i = 0; i < n; ++i) {
    const auto fields = split_line(lines[i + 1]);
    if (fields.size() != header.size()) {
      throw InputError("CSV line " + std::to_string(i + 2) + ": wrong field count");
    }
    for (std::size_t j = 0; j < y_cols.size(); ++j)
      out.y(i, static_cast<int>(j)) = parse_number(fields[y_cols[j]], i + 2);
    for (std::size_t j = 0; j < x_cols.size(); ++j)
      out.x(i, static_cast<int>(j)) = parse_number(fields[x_cols[j]], i + 2);
    if (event_col >= 0) {
      const double f = parse_number(fields[event_col], i + 2);
      if (f != 0.0 && f != 1.0) {
        throw InputError("CSV line " + std::to_string(i + 2) + ": event flag must be 0 or 1");
      }
      event(i) = static_cast<int>(f);
    }
  }
  if (event_col >= 0) out.event = event;
  out.has_partial_markers = saw_partial;
  if (saw_partial) {
    for (std::size_t j = 0; j < is_x1.size(); ++j) {
      if (is_x1[j]) out.x1_cols.push_back(static_cast<int>(j));
    }
  }
  return out;
}

GenericMatrices read_generic_csv(const std::string& path) {
  const auto lines = read_lines(path);
  const auto header = split_line(lines[0]);
  if (header.size() < 2 || header[0] != "matrix") {
    throw InputError("generic CSV header must be: matrix,c1,...,cp");
  }
  const int p = static_cast<int>(header.size()) - 1;
  if (static_cast<int>(lines.size()) - 1 != 2 * p) {
    throw InputError("generic CSV must contain p rows for m followed by p rows for u");
  }
  GenericMatrices out{Matrix(p, p), Matrix(p, p)};
  int m_row = 0, u_row = 0;
  for (int i = 0; i < 2 * p; ++i) {
    const auto fields = split_line(lines[i + 1]);
    if (static_cast<int>(fields.size()) != p + 1) {
      throw InputError("generic CSV line " + std::to_string(i + 2) + ": wrong field count");
    }
    Matrix* target = nullptr;
    int* row = nullptr;
    if (fields[0] == "m") {
      target = &out.m;
      row = &m_row;
    } else if (fields[0] == "u") {
      target = &out.u;
      row = &u_row;
    } else {
      throw InputError("generic CSV line " + std::to_string(i + 2) +
                       ": matrix label must be m or u");
    }
    if (*row >= p) throw InputError("generic CSV: too many rows for matrix " + fields[0]);
    for (int j = 0; j < p; ++j) (*target)(*row, j) = parse_number(fields[j + 1], i + 2);
    ++*row;
  }
  if (m_row != p || u_row != p) throw InputError("generic CSV: missing matrix rows");
  return out;
}

}  // namespace envelope::cli
