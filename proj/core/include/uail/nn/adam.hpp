#pragma once

#include <cstddef>
#include <vector>

#include "uail/nn/param_store.hpp"

namespace uail::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Standard Adam with bias correction. Moment tensors mirror the store's
/// parameter layout; step() requires gradients to have been populated by a
/// backward pass and zeroes them afterwards.
class Adam {
 public:
  explicit Adam(const ParamStore& store, AdamConfig cfg = {});

  void step(ParamStore& store);

  std::size_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return cfg_; }

  /// Moment access for checkpointing (same order as store entries).
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void restore(std::size_t step_count, std::vector<Tensor> m, std::vector<Tensor> v);

 private:
  AdamConfig cfg_;
  std::size_t step_count_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace uail::nn
