#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace heal {

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> col(std::size_t c) const;

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  DenseMatrix transpose() const;
  DenseMatrix select_rows(std::span<const std::size_t> idx) const;
  DenseMatrix submatrix(std::span<const std::size_t> row_idx, std::span<const std::size_t> col_idx) const;

  DenseMatrix& operator+=(const DenseMatrix& o);
  DenseMatrix& operator-=(const DenseMatrix& o);
  DenseMatrix& operator*=(double s);

  double max_abs() const;
  double frobenius() const;
  bool all_finite() const;
  bool is_symmetric(double tol) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using FeatureMatrix = DenseMatrix;

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
// a^T b and a b^T without materializing the transpose.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);
std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x);

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double trace_quadratic(const DenseMatrix& L, const DenseMatrix& X);

// Dense LU with partial pivoting; throws on a singular system.
DenseMatrix solve(DenseMatrix A, DenseMatrix B);

}  // namespace heal
