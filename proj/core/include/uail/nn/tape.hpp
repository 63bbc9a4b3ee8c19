#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uail/nn/param_store.hpp"
#include "uail/nn/tensor.hpp"

namespace uail::nn {

/// Handle to a node on a Tape.
struct Value {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

/// Reverse-mode computation record. A tape is built per forward pass,
/// differentiated once, then discarded. Shapes are checked at every op;
/// nothing broadcasts implicitly.
///
/// Parameter leaves snapshot the store's version counter: mutating the
/// store (an optimizer step) invalidates the tape and backward() refuses
/// to run against it.
class Tape {
 public:
  explicit Tape(const ParamStore* store = nullptr);

  /// Constant leaf (inputs, targets).
  Value input(Tensor t);

  /// Parameter leaf; gradients flow into the store on backward().
  Value param(const std::string& name);

  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);
  /// [m,n] plus a length-n bias vector, spelled out (no broadcasting rules).
  Value add_bias(Value m, Value bias);
  Value scale(Value a, double k);
  Value add_const(Value a, double k);
  Value relu(Value a);
  Value tanh_act(Value a);
  Value sigmoid(Value a);
  Value exp_act(Value a);
  Value clamp(Value a, double lo, double hi);
  Value abs_act(Value a);
  Value square(Value a);
  /// Sum of all entries -> shape [1].
  Value sum(Value a);
  Value concat_cols(Value a, Value b);
  Value slice_cols(Value a, std::size_t lo, std::size_t hi);
  /// New matrix whose row i is a.row(rows[i]); repeated indices allowed.
  Value gather_rows(Value a, std::vector<std::uint32_t> rows);

  const Tensor& value(Value v) const;
  /// Gradient of the last backward() target w.r.t. node v.
  const Tensor& grad(Value v) const;

  /// Accumulates d(loss)/d(param) into the store for every parameter and
  /// marks the store's gradients populated. `loss` must be scalar.
  void backward(Value loss, ParamStore& store);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kInput, kParam, kMatmul, kAdd, kSub, kMul, kAddBias, kScale, kAddConst,
    kRelu, kTanh, kSigmoid, kExp, kClamp, kAbs, kSquare, kSum, kConcatCols,
    kSliceCols, kGatherRows,
  };

  struct Node {
    Op op;
    Value a, b;
    Tensor val;
    Tensor grad;  // allocated lazily during backward
    double k0 = 0.0, k1 = 0.0;
    std::size_t lo = 0, hi = 0;
    std::vector<std::uint32_t> rows;
    std::string pname;
  };

  Value push(Node n);
  Node& node(Value v);
  const Node& node(Value v) const;
  void check(Value v, const char* who) const;
  Tensor& grad_of(Value v);

  std::vector<Node> nodes_;
  const ParamStore* store_ = nullptr;
  std::uint64_t store_version_ = 0;
};

}  // namespace uail::nn
