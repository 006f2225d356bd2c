#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ooskge/errors.hpp"

namespace ooskge {

using Vec = std::vector<double>;

// Dense row-major matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);

// out[i] = a[i] * b[i]
Vec hadamard(std::span<const double> a, std::span<const double> b);
void hadamard_into(std::span<const double> a, std::span<const double> b, std::span<double> out);

// sum_i a[i] * b[i] * c[i]; bit-identical under an a <-> c swap.
double triple_dot(std::span<const double> a, std::span<const double> b, std::span<const double> c);

// Euclidean norm and its square.
double norm2(std::span<const double> a);
double squared_norm(std::span<const double> a);

// Unique minimizer of ||A z - b||^2 + lambda ||z||^2 via the d x d normal
// equations (A^T A + lambda I) z = A^T b and a Cholesky factorization.
// Cost O(N d^2 + d^3) for A of shape N x d. Throws SingularSystemError when
// lambda = 0 and the factorization breaks down.
Vec ridge_solve(const Mat& A, std::span<const double> b, double lambda);

// Number of ridge_solve calls since process start (test instrumentation).
std::size_t ridge_solve_count();

}  // namespace ooskge
