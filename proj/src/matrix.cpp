#include "ifa/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "ifa/errors.hpp"

namespace ifa {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                       shape_str(b));
}

}  // namespace

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

double Matrix::mean_abs() const {
  if (data_.empty()) return 0.0;
  double s = 0.0;
  for (double v : data_) s += std::fabs(v);
  return s / static_cast<double>(data_.size());
}

double Matrix::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Matrix::frob_norm_sq() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::row_copy(std::size_t r) const {
  Matrix out(1, cols_);
  std::memcpy(out.row_ptr(0), row_ptr(r), cols_ * sizeof(double));
  return out;
}

void Matrix::set_row(std::size_t r, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != cols_)
    throw DimensionError("set_row: expected 1x" + std::to_string(cols_) + ", got " +
                         shape_str(row));
  std::memcpy(row_ptr(r), row.row_ptr(0), cols_ * sizeof(double));
}

void Matrix::add_to_row(std::size_t r, const double* src, std::size_t len) {
  if (len != cols_) throw DimensionError("add_to_row: length mismatch");
  double* dst = row_ptr(r);
  for (std::size_t j = 0; j < len; ++j) dst[j] += src[j];
}

Matrix Matrix::take_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::memcpy(out.row_ptr(i), row_ptr(idx[i]), cols_ * sizeof(double));
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_fail("matmul", a, b);
  Matrix c(a.rows(), b.cols(), 0.0);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row_ptr(i);
    double* crow = c.row_ptr(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row_ptr(p);
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) shape_fail("matmul_tn", a, b);
  Matrix c(a.cols(), b.cols(), 0.0);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t r = 0; r < n; ++r) {
    const double* arow = a.row_ptr(r);
    const double* brow = b.row_ptr(r);
    for (std::size_t i = 0; i < k; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c.row_ptr(i);
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) shape_fail("matmul_nt", a, b);
  Matrix c(a.rows(), b.rows(), 0.0);
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row_ptr(i);
    double* crow = c.row_ptr(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = b.row_ptr(j);
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      crow[j] = s;
    }
  }
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  Matrix c = a;
  add_inplace(c, b);
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_fail("sub", a, b);
  Matrix c = a;
  auto cf = c.flat();
  auto bf = b.flat();
  for (std::size_t i = 0; i < cf.size(); ++i) cf[i] -= bf[i];
  return c;
}

void add_inplace(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_fail("add", a, b);
  auto af = a.flat();
  auto bf = b.flat();
  for (std::size_t i = 0; i < af.size(); ++i) af[i] += bf[i];
}

void axpy_inplace(Matrix& a, double s, const Matrix& b) {
  if (!a.same_shape(b)) shape_fail("axpy", a, b);
  auto af = a.flat();
  auto bf = b.flat();
  for (std::size_t i = 0; i < af.size(); ++i) af[i] += s * bf[i];
}

void scale_inplace(Matrix& a, double s) {
  for (double& v : a.flat()) v *= s;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_fail("hadamard", a, b);
  Matrix c = a;
  auto cf = c.flat();
  auto bf = b.flat();
  for (std::size_t i = 0; i < cf.size(); ++i) cf[i] *= bf[i];
  return c;
}

Matrix col_sums(const Matrix& a) {
  Matrix out(1, a.cols(), 0.0);
  double* o = out.row_ptr(0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* r = a.row_ptr(i);
    for (std::size_t j = 0; j < a.cols(); ++j) o[j] += r[j];
  }
  return out;
}

Matrix row_sums(const Matrix& a) {
  Matrix out(a.rows(), 1, 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* r = a.row_ptr(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += r[j];
    out(i, 0) = s;
  }
  return out;
}

void scale_rows_inplace(Matrix& a, std::span<const double> s) {
  if (s.size() != a.rows()) throw DimensionError("scale_rows: scale length != rows");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* r = a.row_ptr(i);
    for (std::size_t j = 0; j < a.cols(); ++j) r[j] *= s[i];
  }
}

void add_row_broadcast_inplace(Matrix& a, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) shape_fail("add_row_broadcast", a, row);
  const double* b = row.row_ptr(0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* r = a.row_ptr(i);
    for (std::size_t j = 0; j < a.cols(); ++j) r[j] += b[j];
  }
}

Matrix slice_cols(const Matrix& a, std::size_t lo, std::size_t width) {
  if (lo + width > a.cols()) throw DimensionError("slice_cols: range exceeds matrix width");
  Matrix out(a.rows(), width);
  for (std::size_t i = 0; i < a.rows(); ++i)
    std::memcpy(out.row_ptr(i), a.row_ptr(i) + lo, width * sizeof(double));
  return out;
}

void paste_cols(Matrix& dst, std::size_t lo, const Matrix& src) {
  if (src.rows() != dst.rows() || lo + src.cols() > dst.cols())
    throw DimensionError("paste_cols: source does not fit destination");
  for (std::size_t i = 0; i < src.rows(); ++i)
    std::memcpy(dst.row_ptr(i) + lo, src.row_ptr(i), src.cols() * sizeof(double));
  return;
}

Matrix concat_cols(const std::vector<const Matrix*>& parts) {
  std::size_t rows = 0, cols = 0;
  for (const Matrix* p : parts) {
    if (p->cols() == 0) continue;
    if (rows == 0) rows = p->rows();
    if (p->rows() != rows) throw DimensionError("concat_cols: row counts differ");
    cols += p->cols();
  }
  Matrix out(rows, cols);
  std::size_t at = 0;
  for (const Matrix* p : parts) {
    if (p->cols() == 0) continue;
    paste_cols(out, at, *p);
    at += p->cols();
  }
  return out;
}

void fill_uniform(Matrix& m, Rng& rng, double lo, double hi) {
  for (double& v : m.flat()) v = rng.uniform(lo, hi);
}

void fill_normal(Matrix& m, Rng& rng, double mean, double stddev) {
  for (double& v : m.flat()) v = rng.normal(mean, stddev);
}

double max_scaled_rel_err(const Matrix& a, const Matrix& ref, double floor_frac) {
  if (!a.same_shape(ref)) shape_fail("max_scaled_rel_err", a, ref);
  const double scale = ref.max_abs();
  if (scale == 0.0) return a.max_abs() == 0.0 ? 0.0 : HUGE_VAL;
  const double floor = floor_frac * scale;
  double worst = 0.0;
  auto af = a.flat();
  auto rf = ref.flat();
  for (std::size_t i = 0; i < af.size(); ++i) {
    const double denom = std::max(std::fabs(rf[i]), floor);
    worst = std::max(worst, std::fabs(af[i] - rf[i]) / denom);
  }
  return worst;
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  if (!a.same_shape(b)) return false;
  auto af = a.flat();
  auto bf = b.flat();
  for (std::size_t i = 0; i < af.size(); ++i) {
    if (std::fabs(af[i] - bf[i]) > tol) return false;
  }
  return true;
}

}  // namespace ifa
