#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "upfl/errors.hpp"

namespace upfl {

/// Dimensions a parameter vector was built for.
struct ShapeTag {
  int dim_x = 0;
  int classes = 0;

  bool operator==(const ShapeTag&) const = default;

  /// Flat length: C*d_x weights (row-major by class), then C biases.
  size_t flat_size() const {
    return static_cast<size_t>(classes) * static_cast<size_t>(dim_x) +
           static_cast<size_t>(classes);
  }

  std::string str() const {
    return "(d_x=" + std::to_string(dim_x) + ", C=" + std::to_string(classes) + ")";
  }
};

/// Flat parameter vector for a softmax-regression model, bound to its shape.
/// Arithmetic between vectors with different shapes is a contract violation.
class ModelVector {
public:
  ModelVector() = default;

  static ModelVector zeros(ShapeTag tag) {
    ModelVector m;
    m.tag_ = tag;
    m.v_.assign(tag.flat_size(), 0.0);
    return m;
  }

  static ModelVector from_values(ShapeTag tag, std::vector<double> values) {
    if (values.size() != tag.flat_size())
      throw ContractError("ModelVector: " + std::to_string(values.size()) +
                          " values for shape " + tag.str());
    ModelVector m;
    m.tag_ = tag;
    m.v_ = std::move(values);
    return m;
  }

  const ShapeTag& shape() const { return tag_; }
  size_t size() const { return v_.size(); }
  double operator[](size_t i) const { return v_[i]; }
  double& operator[](size_t i) { return v_[i]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  double weight(int c, int j) const {
    return v_[static_cast<size_t>(c) * static_cast<size_t>(tag_.dim_x) +
              static_cast<size_t>(j)];
  }
  double& weight(int c, int j) {
    return v_[static_cast<size_t>(c) * static_cast<size_t>(tag_.dim_x) +
              static_cast<size_t>(j)];
  }
  double bias(int c) const {
    return v_[static_cast<size_t>(tag_.classes) * static_cast<size_t>(tag_.dim_x) +
              static_cast<size_t>(c)];
  }
  double& bias(int c) {
    return v_[static_cast<size_t>(tag_.classes) * static_cast<size_t>(tag_.dim_x) +
              static_cast<size_t>(c)];
  }

  void check_same_shape(const ModelVector& o, const char* op) const {
    if (!(tag_ == o.tag_))
      throw ContractError(std::string(op) + ": shape mismatch " + tag_.str() +
                          " vs " + o.tag_.str());
  }

  ModelVector& operator+=(const ModelVector& o) {
    check_same_shape(o, "operator+=");
    for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  ModelVector& operator-=(const ModelVector& o) {
    check_same_shape(o, "operator-=");
    for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  ModelVector& operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
  }

  friend ModelVector operator+(ModelVector a, const ModelVector& b) { return a += b; }
  friend ModelVector operator-(ModelVector a, const ModelVector& b) { return a -= b; }
  friend ModelVector operator*(double s, ModelVector a) { return a *= s; }

  /// this += s * o
  void axpy(double s, const ModelVector& o) {
    check_same_shape(o, "axpy");
    for (size_t i = 0; i < v_.size(); ++i) v_[i] += s * o.v_[i];
  }

  double dot(const ModelVector& o) const {
    check_same_shape(o, "dot");
    double acc = 0.0;
    for (size_t i = 0; i < v_.size(); ++i) acc += v_[i] * o.v_[i];
    return acc;
  }

  double norm2() const { return std::sqrt(dot(*this)); }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  bool operator==(const ModelVector& o) const {
    return tag_ == o.tag_ && v_ == o.v_;
  }

private:
  ShapeTag tag_;
  std::vector<double> v_;
};

inline double max_abs_diff(const ModelVector& a, const ModelVector& b) {
  a.check_same_shape(b, "max_abs_diff");
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace upfl
