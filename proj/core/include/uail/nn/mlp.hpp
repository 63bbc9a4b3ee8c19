#pragma once

#include <string>
#include <vector>

#include "uail/common.hpp"
#include "uail/nn/tape.hpp"

namespace uail::nn {

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

struct LayerSpec {
  std::size_t width = 0;
  Activation act = Activation::kIdentity;
};

const char* activation_name(Activation a);

/// Fully connected stack. Parameters live in an external ParamStore under
/// `<prefix>.<layer>.W` / `.b`; the object itself only remembers the wiring,
/// so it can be rebuilt cheaply from a loaded checkpoint.
class Mlp {
 public:
  /// Registers freshly initialized parameters: He-uniform before ReLU
  /// layers, Glorot-uniform otherwise. Biases start at zero.
  Mlp(ParamStore& store, std::string prefix, std::size_t in_dim, std::vector<LayerSpec> layers, Rng& rng);

  /// Binds to already-existing parameters (checkpoint load path).
  Mlp(std::string prefix, std::size_t in_dim, std::vector<LayerSpec> layers);

  /// Differentiable forward; `x` is a [batch, in_dim] tape value.
  Value forward(Tape& tape, Value x) const;

  /// Plain forward without a tape, for inference.
  Tensor eval(const ParamStore& store, const Tensor& x) const;

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return layers_.back().width; }
  const std::string& prefix() const { return prefix_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  std::string weight_name(std::size_t layer) const;
  std::string bias_name(std::size_t layer) const;

 private:
  std::string prefix_;
  std::size_t in_dim_ = 0;
  std::vector<LayerSpec> layers_;
};

/// One-shot helper matching the substrate contract: runs `input` (shape
/// [n] or [1,n]) through a stack described by `layers`, returning the
/// output row and the tape that produced it.
struct MlpForwardResult {
  Tensor output;
  Tape tape;
  Value output_value;
};

MlpForwardResult forward_mlp(ParamStore& store, const Mlp& mlp, const Tensor& input);

void apply_activation(std::vector<double>& xs, Activation act);

}  // namespace uail::nn
