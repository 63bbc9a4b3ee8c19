#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "uail/nn/checkpoint.hpp"
#include "uail/nn/tensor.hpp"

namespace uail::nn {

/// Named learnable parameters with matching gradient accumulators.
/// Iteration order is insertion order, which keeps optimizer updates and
/// checkpoints deterministic.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;  // same shape as value
  };

  /// Registers a new parameter. Names must be unique.
  Tensor& create(const std::string& name, Tensor init);

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t count() const { return entries_.size(); }

  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }

  /// Clears all gradients and the populated flag.
  void zero_grads();

  /// Set by Tape::backward once every gradient (including zeros for
  /// parameters absent from the graph) is valid.
  bool grads_populated() const { return grads_populated_; }
  void mark_grads_populated() { grads_populated_ = true; }

  /// Monotone counter bumped whenever parameter values change; tapes use it
  /// to detect reuse after mutation.
  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }

  std::size_t total_scalars() const;

  TensorMap to_map() const;
  /// Replaces contents; shapes come from the map.
  void from_map(const TensorMap& m);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t version_ = 0;
  bool grads_populated_ = false;
};

}  // namespace uail::nn
