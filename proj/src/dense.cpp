#include "heal/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "heal/error.hpp"

namespace heal {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::column(std::span<const double> values) {
  DenseMatrix m(values.size(), 1);
  std::copy(values.begin(), values.end(), m.data_.begin());
  return m;
}

std::vector<double> DenseMatrix::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::select_rows(std::span<const std::size_t> idx) const {
  DenseMatrix out(idx.size(), cols_);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] < rows_, "row index out of range");
    std::copy_n(data_.begin() + idx[k] * cols_, cols_, out.data_.begin() + k * cols_);
  }
  return out;
}

DenseMatrix DenseMatrix::submatrix(std::span<const std::size_t> row_idx,
                                   std::span<const std::size_t> col_idx) const {
  DenseMatrix out(row_idx.size(), col_idx.size());
  for (std::size_t a = 0; a < row_idx.size(); ++a) {
    require(row_idx[a] < rows_, "row index out of range");
    for (std::size_t b = 0; b < col_idx.size(); ++b) {
      require(col_idx[b] < cols_, "column index out of range");
      out(a, b) = (*this)(row_idx[a], col_idx[b]);
    }
  }
  return out;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, "shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, "shape mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double DenseMatrix::frobenius() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool DenseMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r + 1; c < cols_; ++c)
      if (std::abs((*this)(r, c) - (*this)(c, r)) > tol) return false;
  return true;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const DenseMatrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<RowMajor> view(DenseMatrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

void check_product(std::size_t inner_a, std::size_t inner_b, const DenseMatrix& a, const DenseMatrix& b) {
  require(inner_a == inner_b, "shape mismatch in matrix product: " + std::to_string(a.rows()) + "x" +
                                  std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                                  std::to_string(b.cols()));
}

}  // namespace

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  check_product(a.cols(), b.rows(), a, b);
  DenseMatrix c(a.rows(), b.cols());
  if (a.cols() > 0) view(c).noalias() = view(a) * view(b);
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_product(a.rows(), b.rows(), a, b);
  DenseMatrix c(a.cols(), b.cols());
  if (a.rows() > 0) view(c).noalias() = view(a).transpose() * view(b);
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_product(a.cols(), b.cols(), a, b);
  DenseMatrix c(a.rows(), b.rows());
  if (a.cols() > 0) view(c).noalias() = view(a) * view(b).transpose();
  return c;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "shape mismatch in matrix-vector product");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += ai[k] * x[k];
    y[i] = s;
  }
  return y;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "shape mismatch in comparison");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

double trace_quadratic(const DenseMatrix& L, const DenseMatrix& X) {
  require(L.rows() == L.cols() && L.cols() == X.rows(), "shape mismatch in quadratic form");
  const DenseMatrix LX = L * X;
  double s = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) s += X.values()[i] * LX.values()[i];
  return s;
}

DenseMatrix solve(DenseMatrix A, DenseMatrix B) {
  const std::size_t n = A.rows();
  require(A.cols() == n && B.rows() == n, "shape mismatch in linear solve");
  const double scale = std::max(A.max_abs(), 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(A(r, k)) > std::abs(A(piv, k))) piv = r;
    if (std::abs(A(piv, k)) <= 1e-14 * scale) fail(ErrorKind::Numerical, "singular linear system");
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(A(k, c), A(piv, c));
      for (std::size_t c = 0; c < B.cols(); ++c) std::swap(B(k, c), B(piv, c));
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = A(r, k) / A(k, k);
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) A(r, c) -= f * A(k, c);
      for (std::size_t c = 0; c < B.cols(); ++c) B(r, c) -= f * B(k, c);
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t c = 0; c < B.cols(); ++c) {
      double s = B(k, c);
      for (std::size_t j = k + 1; j < n; ++j) s -= A(k, j) * B(j, c);
      B(k, c) = s / A(k, k);
    }
  }
  return B;
}

}  // namespace heal
