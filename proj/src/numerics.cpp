#include "ooskge/numerics.hpp"

#include <atomic>
#include <cassert>
#include <cmath>

namespace ooskge {

namespace {

std::atomic<std::size_t> g_ridge_solves{0};

void check_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error("vector length mismatch: " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_length(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec hadamard(std::span<const double> a, std::span<const double> b) {
  check_same_length(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void hadamard_into(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_same_length(a, b);
  check_same_length(a, out);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

double triple_dot(std::span<const double> a, std::span<const double> b,
                  std::span<const double> c) {
  check_same_length(a, b);
  check_same_length(a, c);
  double s = 0.0;
  // Multiplying the outer vectors first keeps the result bit-identical under an
  // a <-> c swap, so callers get exact symmetry rather than symmetry up to
  // rounding.
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * c[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

double squared_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

Vec ridge_solve(const Mat& A, std::span<const double> b, double lambda) {
  g_ridge_solves.fetch_add(1, std::memory_order_relaxed);
  const std::size_t n = A.rows();
  const std::size_t d = A.cols();
  if (b.size() != n) throw Error("ridge_solve: rhs length does not match A rows");
  if (lambda < 0.0) throw Error("ridge_solve: lambda must be non-negative");

  // Normal equations: M = A^T A + lambda I (symmetric), y = A^T b.
  Mat m(d, d);
  Vec y(d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::span<const double> row = A.row(k);
    for (std::size_t i = 0; i < d; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) m(i, j) += ri * row[j];
      y[i] += ri * b[k];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    m(i, i) += lambda;
    for (std::size_t j = 0; j < i; ++j) m(i, j) = m(j, i);
  }

  // Cholesky: M = L L^T, stored in the lower triangle of m.
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= m(i, k) * m(j, k);
      if (i == j) {
        if (s <= 0.0)
          throw SingularSystemError("ridge_solve: normal equations not positive definite "
                                    "(lambda = " + std::to_string(lambda) + ")");
        m(i, i) = std::sqrt(s);
      } else {
        m(i, j) = s / m(j, j);
      }
    }
  }

  // Forward then backward substitution.
  Vec z(d);
  for (std::size_t i = 0; i < d; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= m(i, k) * z[k];
    z[i] = s / m(i, i);
  }
  for (std::size_t ii = d; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t k = ii + 1; k < d; ++k) s -= m(k, ii) * z[k];
    z[ii] = s / m(ii, ii);
  }
  return z;
}

std::size_t ridge_solve_count() { return g_ridge_solves.load(std::memory_order_relaxed); }

}  // namespace ooskge
