#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "uail/common.hpp"

namespace uail::nn {

/// Dense row-major n-d array of doubles. Most of the project uses rank 1
/// (vectors) and rank 2 ([rows, cols] matrices, rows = batch).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);
  static Tensor row(std::vector<double> values);              // shape [1, n]
  static Tensor vec(std::vector<double> values);              // shape [n]
  static Tensor matrix(std::size_t rows, std::size_t cols);   // zero-filled

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }

  std::size_t rows() const;
  std::size_t cols() const;

  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;

  /// Throws NumericError naming `what` if any entry is NaN/Inf.
  void require_finite(const std::string& what) const;

  std::string shape_str() const;
};

/// product(shape); throws ShapeError on zero extents.
std::size_t shape_numel(const std::vector<std::size_t>& shape);

/// c = a @ b for 2-d tensors; shapes checked, never broadcast.
void matmul_into(const Tensor& a, const Tensor& b, Tensor& c);

/// c += a^T @ b (used by backward passes).
void matmul_at_b_accum(const Tensor& a, const Tensor& b, Tensor& c);

/// c += a @ b^T.
void matmul_a_bt_accum(const Tensor& a, const Tensor& b, Tensor& c);

}  // namespace uail::nn
