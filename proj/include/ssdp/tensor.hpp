#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

#include "ssdp/kernels.hpp"

namespace ssdp {

/// Non-owning row-major view.
template <class T>
struct BasicMatView {
  T* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<T> row(std::size_t i) const {
    assert(i < rows);
    return {data + i * cols, cols};
  }
  T& operator()(std::size_t i, std::size_t j) const {
    assert(i < rows && j < cols);
    return data[i * cols + j];
  }
  std::span<T> flat() const { return {data, rows * cols}; }
  std::size_t size() const { return rows * cols; }

  operator BasicMatView<const T>() const { return {data, rows, cols}; }
};

using MatView = BasicMatView<double>;
using ConstMatView = BasicMatView<const double>;

/// Owning row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  MatView view() { return {data_.data(), rows_, cols_}; }
  ConstMatView view() const { return {data_.data(), rows_, cols_}; }
  operator MatView() { return view(); }
  operator ConstMatView() const { return view(); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// out += a * b          a: n x k, b: k x m, out: n x m
inline void gemm_acc(MatView out, ConstMatView a, ConstMatView b) {
  assert(a.cols == b.rows && out.rows == a.rows && out.cols == b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double s = a(i, k);
      if (s != 0.0) kernels::axpy(s, b.row(k), out_row);
    }
  }
}

/// out += a * b^T        a: n x k, b: m x k, out: n x m
inline void gemm_bt_acc(MatView out, ConstMatView a, ConstMatView b) {
  assert(a.cols == b.cols && out.rows == a.rows && out.cols == b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      out(i, j) += kernels::dot(a.row(i), b.row(j));
    }
  }
}

/// out += a^T * b        a: k x n, b: k x m, out: n x m
inline void gemm_at_acc(MatView out, ConstMatView a, ConstMatView b) {
  assert(a.rows == b.rows && out.rows == a.cols && out.cols == b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const auto b_row = b.row(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double s = a(k, i);
      if (s != 0.0) kernels::axpy(s, b_row, out.row(i));
    }
  }
}

}  // namespace ssdp
