#pragma once

#include <map>
#include <string>
#include <vector>

#include "tsimg/series.hpp"

namespace tsimg {

/// Named model tensors. Iteration order is the lexicographic name order,
/// which fixes the order of every reduction over parameters.
class ParamSet {
 public:
  void add(const std::string& name, Matrix value);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  Matrix& at(const std::string& name);
  const Matrix& at(const std::string& name) const;

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }
  std::size_t tensor_count() const { return tensors_.size(); }
  std::vector<std::string> names() const;

  std::size_t scalar_count() const;
  ParamSet zeros_like() const;
  bool congruent_with(const ParamSet& other) const;
  bool all_finite() const;

  /// Bitwise comparison of names, shapes and values.
  bool identical_to(const ParamSet& other) const;

 private:
  std::map<std::string, Matrix> tensors_;
};

/// Gradients share the names and shapes of their parameters.
using GradSet = ParamSet;

}  // namespace tsimg
