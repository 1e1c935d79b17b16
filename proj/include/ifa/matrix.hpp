#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ifa/rng.hpp"

namespace ifa {

// Dense row-major matrix of 64-bit floats. The single numeric carrier for
// embeddings, activations and gradients throughout the library.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c, 0.0); }
  static Matrix ones(std::size_t r, std::size_t c) { return Matrix(r, c, 1.0); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
  const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return {data_.data(), data_.size()}; }

  void fill(double v);
  void zero() { fill(0.0); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const;
  double max_abs() const;
  double mean_abs() const;
  double sum() const;
  double frob_norm_sq() const;

  Matrix transposed() const;
  Matrix row_copy(std::size_t r) const;  // 1 x cols
  void set_row(std::size_t r, const Matrix& row);
  void add_to_row(std::size_t r, const double* src, std::size_t len);
  Matrix take_rows(std::span<const std::size_t> idx) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// ---- products ----
Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T

// ---- elementwise / structural ----
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
void add_inplace(Matrix& a, const Matrix& b);
void axpy_inplace(Matrix& a, double s, const Matrix& b);  // a += s * b
void scale_inplace(Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix col_sums(const Matrix& a);  // 1 x cols
Matrix row_sums(const Matrix& a);  // rows x 1
void scale_rows_inplace(Matrix& a, std::span<const double> s);
void add_row_broadcast_inplace(Matrix& a, const Matrix& row);  // a[i,:] += row

// Column-block helpers for concatenated feature layouts.
Matrix slice_cols(const Matrix& a, std::size_t lo, std::size_t width);
void paste_cols(Matrix& dst, std::size_t lo, const Matrix& src);
Matrix concat_cols(const std::vector<const Matrix*>& parts);

void fill_uniform(Matrix& m, Rng& rng, double lo, double hi);
void fill_normal(Matrix& m, Rng& rng, double mean, double stddev);

// Largest entry-wise relative difference between `a` and reference `ref`.
// Entries far below the reference scale are compared against a floor of
// `floor_frac * max|ref|` so that near-zero entries do not inflate the
// reported error past what the matrix-level agreement supports.
double max_scaled_rel_err(const Matrix& a, const Matrix& ref, double floor_frac = 1e-2);

bool approx_equal(const Matrix& a, const Matrix& b, double tol);

}  // namespace ifa
