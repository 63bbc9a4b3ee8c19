#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "uail/nn/mlp.hpp"
#include "uail/nn/param_store.hpp"

namespace uail::testing {

// Test-only oracles. These deliberately avoid the Tape machinery so they
// stay independent of the code paths they check.

/// Straight-line MLP re-evaluation: plain nested loops, no Tape, no
/// Tensor helpers beyond raw data access.
inline std::vector<double> straight_line_mlp(const nn::ParamStore& store, const nn::Mlp& mlp,
                                             const std::vector<double>& input) {
  std::vector<double> h = input;
  for (std::size_t layer = 0; layer < mlp.layers().size(); ++layer) {
    const auto& w = store.value(mlp.weight_name(layer));
    const auto& b = store.value(mlp.bias_name(layer));
    const std::size_t in = w.shape[0], out = w.shape[1];
    std::vector<double> next(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double acc = b.data[j];
      for (std::size_t i = 0; i < in; ++i) acc += h[i] * w.data[i * out + j];
      next[j] = acc;
    }
    switch (mlp.layers()[layer].act) {
      case nn::Activation::kIdentity: break;
      case nn::Activation::kRelu:
        for (double& x : next) x = x > 0.0 ? x : 0.0;
        break;
      case nn::Activation::kTanh:
        for (double& x : next) x = std::tanh(x);
        break;
      case nn::Activation::kSigmoid:
        for (double& x : next) x = 1.0 / (1.0 + std::exp(-x));
        break;
    }
    h = std::move(next);
  }
  return h;
}

/// Central finite differences of a scalar loss over every parameter entry.
/// `loss` must re-evaluate the computation from scratch on each call.
inline std::vector<std::vector<double>> finite_difference_grads(nn::ParamStore& store,
                                                                const std::function<double()>& loss,
                                                                double h = 1e-6) {
  std::vector<std::vector<double>> grads;
  for (auto& entry : store.entries()) {
    std::vector<double> g(entry.value.data.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double saved = entry.value.data[i];
      entry.value.data[i] = saved + h;
      const double up = loss();
      entry.value.data[i] = saved - h;
      const double down = loss();
      entry.value.data[i] = saved;
      g[i] = (up - down) / (2.0 * h);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

/// Elementwise relative error with a floor that keeps near-zero gradients
/// from amplifying finite-difference noise (~1e-10 at h=1e-6).
inline double grad_rel_err(double analytic, double fd) {
  const double scale = std::max({std::fabs(analytic), std::fabs(fd), 1e-2});
  return std::fabs(analytic - fd) / scale;
}

/// Central differences are invalid within h of a ReLU kink (the analytic
/// subgradient there is one-sided). Shift biases so every ReLU
/// pre-activation sits at least `margin` away from zero; the gradient
/// property holds everywhere else.
inline void nudge_relu_kinks(nn::ParamStore& store, const nn::Mlp& mlp, const std::vector<double>& input,
                             double margin = 1e-3) {
  std::vector<double> h = input;
  for (std::size_t layer = 0; layer < mlp.layers().size(); ++layer) {
    const auto& w = store.value(mlp.weight_name(layer));
    auto& b = store.value(mlp.bias_name(layer));
    const std::size_t in = w.shape[0], out = w.shape[1];
    std::vector<double> z(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double acc = b.data[j];
      for (std::size_t i = 0; i < in; ++i) acc += h[i] * w.data[i * out + j];
      z[j] = acc;
    }
    if (mlp.layers()[layer].act == nn::Activation::kRelu) {
      for (std::size_t j = 0; j < out; ++j) {
        if (std::fabs(z[j]) < margin) {
          const double shift = (z[j] >= 0.0 ? 1.0 : -1.0) * 2.0 * margin;
          b.data[j] += shift;
          z[j] += shift;
        }
      }
    }
    nn::apply_activation(z, mlp.layers()[layer].act);
    h = std::move(z);
  }
}

}  // namespace uail::testing
