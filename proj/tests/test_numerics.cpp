#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "ooskge/errors.hpp"
#include "ooskge/numerics.hpp"
#include "ooskge/rng.hpp"
#include "oracles.hpp"

using namespace ooskge;

namespace {

Mat random_mat(std::size_t n, std::size_t d, rng::Stream& s) {
  Mat A(n, d);
  for (double& x : A.data()) x = s.next_in(-2.0, 2.0);
  return A;
}

Vec random_vec(std::size_t n, rng::Stream& s) {
  Vec v(n);
  for (double& x : v) x = s.next_in(-2.0, 2.0);
  return v;
}

double ridge_objective(const Mat& A, const Vec& b, double lambda, const Vec& z) {
  double obj = lambda * squared_norm(z);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double r = dot(A.row(i), z) - b[i];
    obj += r * r;
  }
  return obj;
}

}  // namespace

TEST_CASE("mat is row-major with contiguous rows") {
  Mat m(2, 3);
  m(0, 0) = 1;
  m(0, 2) = 3;
  m(1, 1) = 5;
  CHECK(m.data() == std::vector<double>{1, 0, 3, 0, 5, 0});
  CHECK(m.row(1)[1] == 5);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
}

TEST_CASE("hadamard products and dots match hand values") {
  CHECK(hadamard(Vec{1, 2}, Vec{3, 4}) == Vec{3, 8});
  CHECK(hadamard(Vec{1, 2}, Vec{0, 0}) == Vec{0, 0});
  CHECK(hadamard(Vec{1.5, -2}, Vec{1, 1}) == Vec{1.5, -2});
  CHECK(triple_dot(Vec{1, 2}, Vec{3, 4}, Vec{5, 6}) == 63.0);
  CHECK(triple_dot(Vec{1, 2}, Vec{3, 4}, Vec{0, 0}) == 0.0);
  CHECK_THROWS_AS(hadamard(Vec{1}, Vec{1, 2}), Error);
  CHECK_THROWS_AS(dot(Vec{1}, Vec{1, 2}), Error);
  CHECK_THROWS_AS(triple_dot(Vec{1}, Vec{1, 2}, Vec{1}), Error);
}

TEST_CASE("triple_dot equals dot of hadamard") {
  rng::Stream s(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec a = random_vec(8, s);
    const Vec b = random_vec(8, s);
    const Vec c = random_vec(8, s);
    const double lhs = triple_dot(a, b, c);
    const double rhs = dot(a, hadamard(b, c));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    CHECK(triple_dot(a, b, c) == triple_dot(c, b, a));
  }
}

TEST_CASE("norms match hand values") {
  CHECK(norm2(Vec{3, 4}) == 5.0);
  CHECK(norm2(Vec{0, 0, 0}) == 0.0);
  CHECK(norm2(Vec{0, 1, 0}) == 1.0);
  CHECK(squared_norm(Vec{3, 4}) == 25.0);
}

TEST_CASE("ridge_solve matches hand-solved systems") {
  {
    Mat A(1, 2);
    A(0, 0) = 1.0;
    const Vec z = ridge_solve(A, Vec{1.0}, 0.5);
    CHECK(z[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(z[1] == doctest::Approx(0.0));
  }
  {
    Mat A(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = 1.0;
    const Vec z = ridge_solve(A, Vec{1.0, 1.0}, 0.0);
    CHECK(z[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("ridge_solve matches the elimination oracle on random instances") {
  rng::Stream s(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + s.next_below(10);
    const std::size_t d = 1 + s.next_below(8);
    const Mat A = random_mat(n, d, s);
    const Vec b = random_vec(n, s);
    const double lambda = s.next_in(0.01, 1.0);
    const Vec z = ridge_solve(A, b, lambda);
    const std::vector<double> expected = oracles::ridge_minimizer(A, b, lambda);
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(z[i] - expected[i]) < 1e-8);
  }
}

TEST_CASE("ridge_solve output is a local minimum of the objective") {
  rng::Stream s(19);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + s.next_below(8);
    const std::size_t d = 1 + s.next_below(6);
    const Mat A = random_mat(n, d, s);
    const Vec b = random_vec(n, s);
    const double lambda = s.next_in(0.01, 1.0);
    const Vec z = ridge_solve(A, b, lambda);
    const double base = ridge_objective(A, b, lambda, z);
    for (int p = 0; p < 10; ++p) {
      Vec perturbed = z;
      for (double& x : perturbed) x += s.next_in(-1e-3, 1e-3);
      CHECK(ridge_objective(A, b, lambda, perturbed) >= base - 1e-12);
    }
  }
}

TEST_CASE("stronger regularization shrinks the solution") {
  rng::Stream s(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat A = random_mat(6, 4, s);
    const Vec b = random_vec(6, s);
    const double l1 = s.next_in(0.001, 0.5);
    const double l2 = l1 + s.next_in(0.1, 2.0);
    CHECK(norm2(ridge_solve(A, b, l1)) >= norm2(ridge_solve(A, b, l2)) - 1e-12);
  }
}

TEST_CASE("singular unregularized systems are reported") {
  Mat A(2, 2);  // rank 1: second column is zero
  A(0, 0) = 1.0;
  A(1, 0) = 2.0;
  CHECK_THROWS_AS(ridge_solve(A, Vec{1.0, 1.0}, 0.0), SingularSystemError);
  CHECK_NOTHROW(ridge_solve(A, Vec{1.0, 1.0}, 1e-6));  // ridge restores uniqueness
}

TEST_CASE("ridge_solve_count counts solves") {
  const std::size_t before = ridge_solve_count();
  Mat A(1, 1);
  A(0, 0) = 1.0;
  ridge_solve(A, Vec{1.0}, 0.1);
  ridge_solve(A, Vec{2.0}, 0.1);
  CHECK(ridge_solve_count() == before + 2);
}
