#include "tsimg/params.hpp"

#include <cstring>

#include "tsimg/error.hpp"

namespace tsimg {

void ParamSet::add(const std::string& name, Matrix value) {
  require(!contains(name), ErrorCode::InvalidArgument, "duplicate tensor name " + name);
  tensors_.emplace(name, std::move(value));
}

Matrix& ParamSet::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) fail(ErrorCode::ShapeMismatch, "missing tensor " + name);
  return it->second;
}

const Matrix& ParamSet::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) fail(ErrorCode::ShapeMismatch, "missing tensor " + name);
  return it->second;
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [name, _] : tensors_) out.push_back(name);
  return out;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += static_cast<std::size_t>(t.size());
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& [name, t] : tensors_) out.tensors_.emplace(name, Matrix::Zero(t.rows(), t.cols()));
  return out;
}

bool ParamSet::congruent_with(const ParamSet& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  auto a = tensors_.begin();
  auto b = other.tensors_.begin();
  for (; a != tensors_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.rows() != b->second.rows() || a->second.cols() != b->second.cols()) {
      return false;
    }
  }
  return true;
}

bool ParamSet::all_finite() const {
  for (const auto& [_, t] : tensors_) {
    if (!t.allFinite()) return false;
  }
  return true;
}

bool ParamSet::identical_to(const ParamSet& other) const {
  if (!congruent_with(other)) return false;
  auto b = other.tensors_.begin();
  for (auto a = tensors_.begin(); a != tensors_.end(); ++a, ++b) {
    const auto bytes = static_cast<std::size_t>(a->second.size()) * sizeof(double);
    if (bytes != 0 && std::memcmp(a->second.data(), b->second.data(), bytes) != 0) return false;
  }
  return true;
}

}  // namespace tsimg
