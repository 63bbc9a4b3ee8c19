#include "uail/nn/param_store.hpp"

namespace uail::nn {

Tensor& ParamStore::create(const std::string& name, Tensor init) {
  if (has(name)) throw Error("parameter '" + name + "' already exists");
  Entry e;
  e.name = name;
  e.grad = Tensor::zeros(init.shape);
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  index_[name] = entries_.size() - 1;
  bump_version();
  return entries_.back().value;
}

Tensor& ParamStore::value(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return entries_[it->second].value;
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return entries_[it->second].value;
}

Tensor& ParamStore::grad(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return entries_[it->second].grad;
}

const Tensor& ParamStore::grad(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return entries_[it->second].grad;
}

void ParamStore::zero_grads() {
  for (auto& e : entries_) std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
  grads_populated_ = false;
}

std::size_t ParamStore::total_scalars() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

TensorMap ParamStore::to_map() const {
  TensorMap m;
  m.reserve(entries_.size());
  for (const auto& e : entries_) m.emplace_back(e.name, e.value);
  return m;
}

void ParamStore::from_map(const TensorMap& m) {
  entries_.clear();
  index_.clear();
  for (const auto& [name, t] : m) create(name, t);
  bump_version();
}

}  // namespace uail::nn
