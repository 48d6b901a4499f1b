#include "dicnet/diffcore/tensor.hpp"

#include "dicnet/core/error.hpp"

#include <cstring>

namespace dicnet {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.rows) + " x " + std::to_string(s.cols) + ")";
}

bool is_binary(const Matrix& m) {
  return (m.array() == 0.0 || m.array() == 1.0).all();
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return a.size() == 0 ||
         std::memcmp(a.data(), b.data(),
                     static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

void ParamStore::add(const std::string& name, Matrix value) {
  if (name.empty()) throw ValidationError("diffcore", "empty parameter name");
  if (!values_.emplace(name, std::move(value)).second) {
    throw ValidationError("diffcore", "duplicate parameter '" + name + "'");
  }
}

void ParamStore::set(const std::string& name, Matrix value) {
  Matrix& slot = mutable_at(name);
  if (shape_of(slot) != shape_of(value)) {
    throw ShapeError("diffcore", "parameter '" + name + "' has shape " +
                                     to_string(shape_of(slot)) + ", got " +
                                     to_string(shape_of(value)));
  }
  slot = std::move(value);
}

const Matrix& ParamStore::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) {
    throw ValidationError("diffcore", "unknown parameter '" + name + "'");
  }
  return it->second;
}

Matrix& ParamStore::mutable_at(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) {
    throw ValidationError("diffcore", "unknown parameter '" + name + "'");
  }
  return it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& [name, value] : values_) total += static_cast<std::size_t>(value.size());
  return total;
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.values_.size() != b.values_.size()) return false;
  for (auto ia = a.values_.begin(), ib = b.values_.begin(); ia != a.values_.end();
       ++ia, ++ib) {
    if (ia->first != ib->first || !bitwise_equal(ia->second, ib->second)) return false;
  }
  return true;
}

}  // namespace dicnet
