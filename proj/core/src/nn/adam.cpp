#include "uail/nn/adam.hpp"

#include <cmath>

namespace uail::nn {

Adam::Adam(const ParamStore& store, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(store.count());
  v_.reserve(store.count());
  for (const auto& e : store.entries()) {
    m_.push_back(Tensor::zeros(e.value.shape));
    v_.push_back(Tensor::zeros(e.value.shape));
  }
}

void Adam::step(ParamStore& store) {
  if (store.count() != m_.size()) throw Error("Adam: parameter count changed since construction");
  if (!store.grads_populated()) {
    // Name the first parameter to make the failure actionable.
    const std::string who = store.count() ? store.entries().front().name : "<empty>";
    throw Error("Adam: missing gradients (no backward pass since last step), first parameter '" + who + "'");
  }
  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
  auto& entries = store.entries();
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto& value = entries[p].value;
    auto& grad = entries[p].grad;
    auto& m = m_[p];
    auto& v = v_[p];
    if (!value.same_shape(m)) throw ShapeError("Adam: moment shape mismatch for '" + entries[p].name + "'");
    for (std::size_t i = 0; i < value.data.size(); ++i) {
      const double g = grad.data[i];
      m.data[i] = cfg_.beta1 * m.data[i] + (1.0 - cfg_.beta1) * g;
      v.data[i] = cfg_.beta2 * v.data[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      value.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
  store.bump_version();
  store.zero_grads();
}

void Adam::restore(std::size_t step_count, std::vector<Tensor> m, std::vector<Tensor> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw Error("Adam::restore: moment count mismatch");
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!m[i].same_shape(m_[i]) || !v[i].same_shape(v_[i])) throw ShapeError("Adam::restore: moment shape mismatch");
  step_count_ = step_count;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace uail::nn
