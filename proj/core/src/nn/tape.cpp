#include "uail/nn/tape.hpp"

#include <cmath>

namespace uail::nn {

Tape::Tape(const ParamStore* store) : store_(store) {
  if (store_) store_version_ = store_->version();
}

Value Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Value{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tape::Node& Tape::node(Value v) { return nodes_[v.id]; }
const Tape::Node& Tape::node(Value v) const { return nodes_[v.id]; }

void Tape::check(Value v, const char* who) const {
  if (!v.valid() || v.id >= nodes_.size()) throw Error(std::string(who) + ": invalid value handle");
}

Value Tape::input(Tensor t) {
  Node n;
  n.op = Op::kInput;
  n.val = std::move(t);
  return push(std::move(n));
}

Value Tape::param(const std::string& name) {
  if (!store_) throw Error("Tape::param: tape was built without a ParamStore");
  if (store_->version() != store_version_)
    throw Error("stale tape: parameter store was mutated after tape construction");
  Node n;
  n.op = Op::kParam;
  n.val = store_->value(name);
  n.pname = name;
  return push(std::move(n));
}

Value Tape::matmul(Value a, Value b) {
  check(a, "matmul");
  check(b, "matmul");
  Node n;
  n.op = Op::kMatmul;
  n.a = a;
  n.b = b;
  matmul_into(node(a).val, node(b).val, n.val);
  return push(std::move(n));
}

Value Tape::add(Value a, Value b) {
  check(a, "add");
  check(b, "add");
  const Tensor& ta = node(a).val;
  const Tensor& tb = node(b).val;
  if (!ta.same_shape(tb)) throw ShapeError("add: shapes differ, " + ta.shape_str() + " vs " + tb.shape_str());
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.val = ta;
  for (std::size_t i = 0; i < n.val.data.size(); ++i) n.val.data[i] += tb.data[i];
  return push(std::move(n));
}

Value Tape::sub(Value a, Value b) {
  check(a, "sub");
  check(b, "sub");
  const Tensor& ta = node(a).val;
  const Tensor& tb = node(b).val;
  if (!ta.same_shape(tb)) throw ShapeError("sub: shapes differ, " + ta.shape_str() + " vs " + tb.shape_str());
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.val = ta;
  for (std::size_t i = 0; i < n.val.data.size(); ++i) n.val.data[i] -= tb.data[i];
  return push(std::move(n));
}

Value Tape::mul(Value a, Value b) {
  check(a, "mul");
  check(b, "mul");
  const Tensor& ta = node(a).val;
  const Tensor& tb = node(b).val;
  if (!ta.same_shape(tb)) throw ShapeError("mul: shapes differ, " + ta.shape_str() + " vs " + tb.shape_str());
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.val = ta;
  for (std::size_t i = 0; i < n.val.data.size(); ++i) n.val.data[i] *= tb.data[i];
  return push(std::move(n));
}

Value Tape::add_bias(Value m, Value bias) {
  check(m, "add_bias");
  check(bias, "add_bias");
  const Tensor& tm = node(m).val;
  const Tensor& tb = node(bias).val;
  if (tm.rank() != 2 || tb.rank() != 1 || tb.shape[0] != tm.shape[1])
    throw ShapeError("add_bias: need [m,n] and [n], got " + tm.shape_str() + " and " + tb.shape_str());
  Node n;
  n.op = Op::kAddBias;
  n.a = m;
  n.b = bias;
  n.val = tm;
  const std::size_t rows = tm.shape[0], cols = tm.shape[1];
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) n.val.data[r * cols + c] += tb.data[c];
  return push(std::move(n));
}

Value Tape::scale(Value a, double k) {
  check(a, "scale");
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.k0 = k;
  n.val = node(a).val;
  for (double& x : n.val.data) x *= k;
  return push(std::move(n));
}

Value Tape::add_const(Value a, double k) {
  check(a, "add_const");
  Node n;
  n.op = Op::kAddConst;
  n.a = a;
  n.k0 = k;
  n.val = node(a).val;
  for (double& x : n.val.data) x += k;
  return push(std::move(n));
}

Value Tape::relu(Value a) {
  check(a, "relu");
  Node n;
  n.op = Op::kRelu;
  n.a = a;
  n.val = node(a).val;
  for (double& x : n.val.data) x = x > 0.0 ? x : 0.0;
  return push(std::move(n));
}

Value Tape::tanh_act(Value a) {
  check(a, "tanh");
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.val = node(a).val;
  for (double& x : n.val.data) x = std::tanh(x);
  return push(std::move(n));
}

Value Tape::sigmoid(Value a) {
  check(a, "sigmoid");
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  n.val = node(a).val;
  for (double& x : n.val.data) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(n));
}

Value Tape::exp_act(Value a) {
  check(a, "exp");
  Node n;
  n.op = Op::kExp;
  n.a = a;
  n.val = node(a).val;
  for (double& x : n.val.data) x = std::exp(x);
  return push(std::move(n));
}

Value Tape::clamp(Value a, double lo, double hi) {
  check(a, "clamp");
  Node n;
  n.op = Op::kClamp;
  n.a = a;
  n.k0 = lo;
  n.k1 = hi;
  n.val = node(a).val;
  for (double& x : n.val.data) x = x < lo ? lo : (x > hi ? hi : x);
  return push(std::move(n));
}

Value Tape::abs_act(Value a) {
  check(a, "abs");
  Node n;
  n.op = Op::kAbs;
  n.a = a;
  n.val = node(a).val;
  for (double& x : n.val.data) x = std::fabs(x);
  return push(std::move(n));
}

Value Tape::square(Value a) {
  check(a, "square");
  Node n;
  n.op = Op::kSquare;
  n.a = a;
  n.val = node(a).val;
  for (double& x : n.val.data) x = x * x;
  return push(std::move(n));
}

Value Tape::sum(Value a) {
  check(a, "sum");
  Node n;
  n.op = Op::kSum;
  n.a = a;
  double acc = 0.0;
  for (double x : node(a).val.data) acc += x;
  n.val = Tensor({1}, {acc});
  return push(std::move(n));
}

Value Tape::concat_cols(Value a, Value b) {
  check(a, "concat_cols");
  check(b, "concat_cols");
  const Tensor& ta = node(a).val;
  const Tensor& tb = node(b).val;
  if (ta.rank() != 2 || tb.rank() != 2 || ta.shape[0] != tb.shape[0])
    throw ShapeError("concat_cols: need matching row counts, got " + ta.shape_str() + " and " + tb.shape_str());
  const std::size_t rows = ta.shape[0], ca = ta.shape[1], cb = tb.shape[1];
  Node n;
  n.op = Op::kConcatCols;
  n.a = a;
  n.b = b;
  n.val = Tensor::zeros({rows, ca + cb});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < ca; ++c) n.val.data[r * (ca + cb) + c] = ta.data[r * ca + c];
    for (std::size_t c = 0; c < cb; ++c) n.val.data[r * (ca + cb) + ca + c] = tb.data[r * cb + c];
  }
  return push(std::move(n));
}

Value Tape::slice_cols(Value a, std::size_t lo, std::size_t hi) {
  check(a, "slice_cols");
  const Tensor& ta = node(a).val;
  if (ta.rank() != 2) throw ShapeError("slice_cols: need 2-d tensor, got " + ta.shape_str());
  if (lo >= hi || hi > ta.shape[1])
    throw ShapeError("slice_cols: range [" + std::to_string(lo) + "," + std::to_string(hi) + ") out of " +
                     ta.shape_str());
  const std::size_t rows = ta.shape[0], cols = ta.shape[1], w = hi - lo;
  Node n;
  n.op = Op::kSliceCols;
  n.a = a;
  n.lo = lo;
  n.hi = hi;
  n.val = Tensor::zeros({rows, w});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) n.val.data[r * w + c] = ta.data[r * cols + lo + c];
  return push(std::move(n));
}

Value Tape::gather_rows(Value a, std::vector<std::uint32_t> rows) {
  check(a, "gather_rows");
  const Tensor& ta = node(a).val;
  if (ta.rank() != 2) throw ShapeError("gather_rows: need 2-d tensor, got " + ta.shape_str());
  const std::size_t cols = ta.shape[1];
  for (std::uint32_t r : rows)
    if (r >= ta.shape[0]) throw ShapeError("gather_rows: row index " + std::to_string(r) + " out of " + ta.shape_str());
  Node n;
  n.op = Op::kGatherRows;
  n.a = a;
  n.val = Tensor::zeros({rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < cols; ++c) n.val.data[i * cols + c] = ta.data[rows[i] * cols + c];
  n.rows = std::move(rows);
  return push(std::move(n));
}

const Tensor& Tape::value(Value v) const {
  check(v, "value");
  return node(v).val;
}

const Tensor& Tape::grad(Value v) const {
  check(v, "grad");
  const Node& n = node(v);
  if (n.grad.data.empty()) throw Error("grad: backward() has not reached this node");
  return n.grad;
}

Tensor& Tape::grad_of(Value v) {
  Node& n = node(v);
  if (n.grad.data.empty()) n.grad = Tensor::zeros(n.val.shape);
  return n.grad;
}

void Tape::backward(Value loss, ParamStore& store) {
  check(loss, "backward");
  if (store_ && &store != store_) throw Error("backward: store differs from the tape's store");
  if (store_ && store.version() != store_version_)
    throw Error("stale tape: parameter store was mutated after the forward pass");
  if (node(loss).val.size() != 1) throw ShapeError("backward: loss must be scalar, got " + node(loss).val.shape_str());

  grad_of(loss).data[0] = 1.0;

  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.data.empty()) continue;  // not on any path to the loss
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::kInput:
      case Op::kParam:
        break;
      case Op::kMatmul: {
        // dA += g @ B^T ; dB += A^T @ g
        matmul_a_bt_accum(g, node(n.b).val, grad_of(n.a));
        matmul_at_b_accum(node(n.a).val, g, grad_of(n.b));
        break;
      }
      case Op::kAdd: {
        Tensor& ga = grad_of(n.a);
        Tensor& gb = grad_of(n.b);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          ga.data[i] += g.data[i];
          gb.data[i] += g.data[i];
        }
        break;
      }
      case Op::kSub: {
        Tensor& ga = grad_of(n.a);
        Tensor& gb = grad_of(n.b);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          ga.data[i] += g.data[i];
          gb.data[i] -= g.data[i];
        }
        break;
      }
      case Op::kMul: {
        Tensor& ga = grad_of(n.a);
        Tensor& gb = grad_of(n.b);
        const Tensor& va = node(n.a).val;
        const Tensor& vb = node(n.b).val;
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          ga.data[i] += g.data[i] * vb.data[i];
          gb.data[i] += g.data[i] * va.data[i];
        }
        break;
      }
      case Op::kAddBias: {
        Tensor& ga = grad_of(n.a);
        Tensor& gb = grad_of(n.b);
        const std::size_t rows = n.val.shape[0], cols = n.val.shape[1];
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) gb.data[c] += g.data[r * cols + c];
        break;
      }
      case Op::kScale: {
        Tensor& ga = grad_of(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += n.k0 * g.data[i];
        break;
      }
      case Op::kAddConst: {
        Tensor& ga = grad_of(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
        break;
      }
      case Op::kRelu: {
        Tensor& ga = grad_of(n.a);
        const Tensor& x = node(n.a).val;
        for (std::size_t i = 0; i < g.data.size(); ++i)
          if (x.data[i] > 0.0) ga.data[i] += g.data[i];
        break;
      }
      case Op::kTanh: {
        Tensor& ga = grad_of(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * (1.0 - n.val.data[i] * n.val.data[i]);
        break;
      }
      case Op::kSigmoid: {
        Tensor& ga = grad_of(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          ga.data[i] += g.data[i] * n.val.data[i] * (1.0 - n.val.data[i]);
        break;
      }
      case Op::kExp: {
        Tensor& ga = grad_of(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * n.val.data[i];
        break;
      }
      case Op::kClamp: {
        Tensor& ga = grad_of(n.a);
        const Tensor& x = node(n.a).val;
        for (std::size_t i = 0; i < g.data.size(); ++i)
          if (x.data[i] >= n.k0 && x.data[i] <= n.k1) ga.data[i] += g.data[i];
        break;
      }
      case Op::kAbs: {
        Tensor& ga = grad_of(n.a);
        const Tensor& x = node(n.a).val;
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          if (x.data[i] > 0.0)
            ga.data[i] += g.data[i];
          else if (x.data[i] < 0.0)
            ga.data[i] -= g.data[i];
        }
        break;
      }
      case Op::kSquare: {
        Tensor& ga = grad_of(n.a);
        const Tensor& x = node(n.a).val;
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += 2.0 * x.data[i] * g.data[i];
        break;
      }
      case Op::kSum: {
        Tensor& ga = grad_of(n.a);
        const double gs = g.data[0];
        for (double& v : ga.data) v += gs;
        break;
      }
      case Op::kConcatCols: {
        Tensor& ga = grad_of(n.a);
        Tensor& gb = grad_of(n.b);
        const std::size_t rows = n.val.shape[0];
        const std::size_t ca = node(n.a).val.shape[1], cb = node(n.b).val.shape[1];
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < ca; ++c) ga.data[r * ca + c] += g.data[r * (ca + cb) + c];
          for (std::size_t c = 0; c < cb; ++c) gb.data[r * cb + c] += g.data[r * (ca + cb) + ca + c];
        }
        break;
      }
      case Op::kSliceCols: {
        Tensor& ga = grad_of(n.a);
        const std::size_t rows = n.val.shape[0], w = n.val.shape[1];
        const std::size_t cols = node(n.a).val.shape[1];
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < w; ++c) ga.data[r * cols + n.lo + c] += g.data[r * w + c];
        break;
      }
      case Op::kGatherRows: {
        Tensor& ga = grad_of(n.a);
        const std::size_t cols = n.val.shape[1];
        for (std::size_t i = 0; i < n.rows.size(); ++i)
          for (std::size_t c = 0; c < cols; ++c) ga.data[n.rows[i] * cols + c] += g.data[i * cols + c];
        break;
      }
    }
  }

  // Fold parameter-leaf gradients into the store. Parameters absent from
  // the graph keep their (correct) zero gradient.
  for (std::uint32_t id = 0; id <= loss.id; ++id) {
    Node& n = nodes_[id];
    if (n.op != Op::kParam || n.grad.data.empty()) continue;
    Tensor& g = store.grad(n.pname);
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += n.grad.data[i];
  }
  store.mark_grads_populated();
}

}  // namespace uail::nn
