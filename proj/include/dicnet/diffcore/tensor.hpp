#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <string>

namespace dicnet {

/// Dense row-major matrix of doubles. Every runtime array in the library
/// (features, embeddings, predictions, masks, parameters) is one of these.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

struct Shape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  friend bool operator==(const Shape&, const Shape&) = default;
};

inline Shape shape_of(const Matrix& m) { return {m.rows(), m.cols()}; }

/// "(rows x cols)"
std::string to_string(const Shape& s);

/// True when every entry is 0 or 1.
bool is_binary(const Matrix& m);

bool bitwise_equal(const Matrix& a, const Matrix& b);

/// Named trainable tensors. Names are unique and shapes are fixed once a
/// name is added. Iteration order is lexicographic by name.
class ParamStore {
 public:
  void add(const std::string& name, Matrix value);
  /// Replaces the value of an existing parameter; the shape must match.
  void set(const std::string& name, Matrix value);
  const Matrix& at(const std::string& name) const;
  Matrix& mutable_at(const std::string& name);
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  std::size_t size() const { return values_.size(); }
  std::size_t scalar_count() const;

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::map<std::string, Matrix> values_;
};

/// Parameter name -> gradient of the same shape.
using GradientMap = std::map<std::string, Matrix>;

}  // namespace dicnet
