#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace byzsim {

using DenseVector = std::vector<double>;

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
/// a - b
DenseVector subtract(std::span<const double> a, std::span<const double> b);

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
DenseVector multiply(const DenseMatrix& a, std::span<const double> x);

/// Lower-triangular L with L * L^T = cov. The input must be symmetric
/// (within 1e-10, relative) and positive definite; otherwise throws
/// FactorizationError carrying the failing pivot.
DenseMatrix cholesky(const DenseMatrix& cov);

/// Solves L L^T x = b for a factor returned by cholesky().
DenseVector cholesky_solve(const DenseMatrix& lower, std::span<const double> b);

/// Solves A x = b for symmetric positive definite A.
DenseVector solve_spd(const DenseMatrix& a, std::span<const double> b);

/// Symmetric Toeplitz matrix with entries rho^|i-j|.
DenseMatrix toeplitz_ar1(std::size_t p, double rho);

}  // namespace byzsim
