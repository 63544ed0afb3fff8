#pragma once

#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace envelope::cli {

// Insertion-ordered JSON document with floating-point values printed to 17
// significant digits, so numeric output round-trips and serialization is
// byte-stable across runs.
class JsonValue {
 public:
  JsonValue() : kind_(Kind::Null) {}
  JsonValue(bool b) : kind_(Kind::Bool), bool_(b) {}
  JsonValue(int v) : kind_(Kind::Int), int_(v) {}
  JsonValue(long long v) : kind_(Kind::Int), int_(v) {}
  JsonValue(std::uint64_t v) : kind_(Kind::Int), int_(static_cast<long long>(v)) {}
  JsonValue(double v) : kind_(Kind::Double), double_(v) {}
  JsonValue(const char* s) : kind_(Kind::String), string_(s) {}
  JsonValue(std::string s) : kind_(Kind::String), string_(std::move(s)) {}

  static JsonValue object() {
    JsonValue v;
    v.kind_ = Kind::Object;
    return v;
  }
  static JsonValue array() {
    JsonValue v;
    v.kind_ = Kind::Array;
    return v;
  }
  static JsonValue matrix(const Eigen::MatrixXd& m) {
    JsonValue rows = array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      JsonValue row = array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push(JsonValue(m(i, j)));
      rows.push(std::move(row));
    }
    return rows;
  }

  JsonValue& set(const std::string& key, JsonValue v) {
    members_.emplace_back(key, std::move(v));
    return members_.back().second;
  }
  void push(JsonValue v) { elements_.push_back(std::move(v)); }

  std::string dump() const {
    std::string out;
    write(out);
    return out;
  }

 private:
  enum class Kind { Null, Bool, Int, Double, String, Array, Object };

  static void write_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out += c;
      }
    }
    out += '"';
  }

  void write(std::string& out) const {
    char buf[64];
    switch (kind_) {
      case Kind::Null: out += "null"; break;
      case Kind::Bool: out += bool_ ? "true" : "false"; break;
      case Kind::Int:
        std::snprintf(buf, sizeof(buf), "%lld", int_);
        out += buf;
        break;
      case Kind::Double:
        std::snprintf(buf, sizeof(buf), "%.17g", double_);
        out += buf;
        break;
      case Kind::String: write_escaped(out, string_); break;
      case Kind::Array:
        out += '[';
        for (std::size_t i = 0; i < elements_.size(); ++i) {
          if (i > 0) out += ',';
          elements_[i].write(out);
        }
        out += ']';
        break;
      case Kind::Object:
        out += '{';
        for (std::size_t i = 0; i < members_.size(); ++i) {
          if (i > 0) out += ',';
          write_escaped(out, members_[i].first);
          out += ':';
          members_[i].second.write(out);
        }
        out += '}';
        break;
    }
  }

  Kind kind_;
  bool bool_ = false;
  long long int_ = 0;
  double double_ = 0.0;
  std::string string_;
  std::vector<JsonValue> elements_;
  std::vector<std::pair<std::string, JsonValue>> members_;
};

}  // namespace envelope::cli
