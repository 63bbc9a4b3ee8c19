#include "uail/nn/tensor.hpp"

#include <cmath>
#include <sstream>

namespace uail::nn {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor extent must be positive");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (shape_numel(shape) != data.size())
    throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " + shape_str());
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::row(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::vec(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols) { return zeros({rows, cols}); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows(): tensor is not 2-d, shape " + shape_str());
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() == 2) return shape[1];
  if (rank() == 1) return shape[0];
  throw ShapeError("cols(): tensor rank " + std::to_string(rank()));
}

double& Tensor::at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
double Tensor::at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

bool Tensor::all_finite() const {
  for (double x : data)
    if (!std::isfinite(x)) return false;
  return true;
}

void Tensor::require_finite(const std::string& what) const {
  if (!all_finite()) throw NumericError("non-finite values in " + what);
}

std::string Tensor::shape_str() const {
  std::ostringstream ss;
  ss << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) ss << (i ? "," : "") << shape[i];
  ss << "]";
  return ss.str();
}

void matmul_into(const Tensor& a, const Tensor& b, Tensor& c) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul: operands must be 2-d, got " + a.shape_str() + " and " + b.shape_str());
  const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  if (b.shape[0] != k)
    throw ShapeError("matmul: inner dimensions differ, " + a.shape_str() + " vs " + b.shape_str());
  c = Tensor::zeros({m, n});
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  // ikj order keeps the inner loop contiguous in b and c.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = pa[i * k + kk];
      if (aik == 0.0) continue;
      const double* brow = pb + kk * n;
      double* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

void matmul_at_b_accum(const Tensor& a, const Tensor& b, Tensor& c) {
  // c[k,n] += sum_i a[i,k] * b[i,n]
  const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  if (b.shape[0] != m || c.shape[0] != k || c.shape[1] != n) throw ShapeError("matmul_at_b_accum: shape mismatch");
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = pb + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = pa[i * k + kk];
      if (aik == 0.0) continue;
      double* crow = pc + kk * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

void matmul_a_bt_accum(const Tensor& a, const Tensor& b, Tensor& c) {
  // c[m,k] += sum_j a[m,j] * b[k,j]
  const std::size_t m = a.shape[0], n = a.shape[1], k = b.shape[0];
  if (b.shape[1] != n || c.shape[0] != m || c.shape[1] != k) throw ShapeError("matmul_a_bt_accum: shape mismatch");
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * n;
    double* crow = pc + i * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double* brow = pb + kk * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      crow[kk] += acc;
    }
  }
}

}  // namespace uail::nn
