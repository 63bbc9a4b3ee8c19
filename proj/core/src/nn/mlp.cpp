#include "uail/nn/mlp.hpp"

#include <cmath>

namespace uail::nn {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "?";
}

namespace {
Tensor init_weight(std::size_t fan_in, std::size_t fan_out, Activation act, Rng& rng) {
  // He-uniform for ReLU, Glorot-uniform otherwise.
  const double limit = act == Activation::kRelu ? std::sqrt(6.0 / static_cast<double>(fan_in))
                                                : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w = Tensor::zeros({fan_in, fan_out});
  for (double& x : w.data) x = rng.uniform(-limit, limit);
  return w;
}
}  // namespace

Mlp::Mlp(ParamStore& store, std::string prefix, std::size_t in_dim, std::vector<LayerSpec> layers, Rng& rng)
    : prefix_(std::move(prefix)), in_dim_(in_dim), layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("Mlp '" + prefix_ + "': layer list is empty");
  std::size_t fan_in = in_dim_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    store.create(weight_name(i), init_weight(fan_in, layers_[i].width, layers_[i].act, rng));
    store.create(bias_name(i), Tensor::zeros({layers_[i].width}));
    fan_in = layers_[i].width;
  }
}

Mlp::Mlp(std::string prefix, std::size_t in_dim, std::vector<LayerSpec> layers)
    : prefix_(std::move(prefix)), in_dim_(in_dim), layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("Mlp '" + prefix_ + "': layer list is empty");
}

std::string Mlp::weight_name(std::size_t layer) const { return prefix_ + "." + std::to_string(layer) + ".W"; }
std::string Mlp::bias_name(std::size_t layer) const { return prefix_ + "." + std::to_string(layer) + ".b"; }

Value Mlp::forward(Tape& tape, Value x) const {
  const Tensor& in = tape.value(x);
  if (in.rank() != 2 || in.shape[1] != in_dim_)
    throw ShapeError("Mlp '" + prefix_ + "' layer 0 expects input width " + std::to_string(in_dim_) + ", got " +
                     in.shape_str());
  Value h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Value w = tape.param(weight_name(i));
    Value b = tape.param(bias_name(i));
    h = tape.add_bias(tape.matmul(h, w), b);
    switch (layers_[i].act) {
      case Activation::kIdentity: break;
      case Activation::kRelu: h = tape.relu(h); break;
      case Activation::kTanh: h = tape.tanh_act(h); break;
      case Activation::kSigmoid: h = tape.sigmoid(h); break;
    }
  }
  return h;
}

void apply_activation(std::vector<double>& xs, Activation act) {
  switch (act) {
    case Activation::kIdentity: return;
    case Activation::kRelu:
      for (double& x : xs) x = x > 0.0 ? x : 0.0;
      return;
    case Activation::kTanh:
      for (double& x : xs) x = std::tanh(x);
      return;
    case Activation::kSigmoid:
      for (double& x : xs) x = 1.0 / (1.0 + std::exp(-x));
      return;
  }
}

Tensor Mlp::eval(const ParamStore& store, const Tensor& x) const {
  Tensor h = x;
  if (h.rank() == 1) h.shape = {1, h.shape[0]};
  if (h.rank() != 2 || h.shape[1] != in_dim_)
    throw ShapeError("Mlp '" + prefix_ + "' layer 0 expects input width " + std::to_string(in_dim_) + ", got " +
                     x.shape_str());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Tensor& w = store.value(weight_name(i));
    const Tensor& b = store.value(bias_name(i));
    Tensor out;
    matmul_into(h, w, out);
    const std::size_t rows = out.shape[0], cols = out.shape[1];
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out.data[r * cols + c] += b.data[c];
    apply_activation(out.data, layers_[i].act);
    h = std::move(out);
  }
  return h;
}

MlpForwardResult forward_mlp(ParamStore& store, const Mlp& mlp, const Tensor& input) {
  Tensor in = input;
  if (in.rank() == 1) in.shape = {1, in.shape[0]};
  MlpForwardResult res{Tensor(), Tape(&store), Value{}};
  Value x = res.tape.input(std::move(in));
  res.output_value = mlp.forward(res.tape, x);
  res.output = res.tape.value(res.output_value);
  res.output.require_finite("mlp '" + mlp.prefix() + "' output");
  return res;
}

}  // namespace uail::nn
