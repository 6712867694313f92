#include <doctest.h>

#include <cmath>

#include "nsd/errors.hpp"
#include "nsd/matrix.hpp"
#include "nsd/rng.hpp"
#include "nsd/svd.hpp"

using nsd::Rng;
using nsd::la::Matrix;
using nsd::la::svd;
using nsd::la::SvdResult;

namespace {

double reconstruction_error(const Matrix& a, const SvdResult& r) {
  Matrix rec(a.rows(), a.cols());
  for (std::size_t k = 0; k < r.singular_values.size(); ++k) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < a.cols(); ++j) {
        rec(i, j) +=
            r.singular_values[k] * r.left_vectors(i, k) * r.right_vectors(j, k);
      }
    }
  }
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = rec.data()[i] - a.data()[i];
    err += d * d;
  }
  return std::sqrt(err);
}

double max_orthonormality_defect(const Matrix& q) {
  double worst = 0.0;
  for (std::size_t a = 0; a < q.cols(); ++a) {
    for (std::size_t b = a; b < q.cols(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < q.rows(); ++i) s += q(i, a) * q(i, b);
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

void check_valid(const Matrix& a, const SvdResult& r) {
  const double s1 = r.singular_values.empty() ? 0.0 : r.singular_values[0];
  for (std::size_t i = 0; i + 1 < r.singular_values.size(); ++i) {
    CHECK(r.singular_values[i] >= r.singular_values[i + 1]);
  }
  for (double s : r.singular_values) CHECK(s >= 0.0);
  const double tol = s1 > 0.0 ? 1e-9 * s1 : 1e-12;
  CHECK(reconstruction_error(a, r) < tol);
  CHECK(max_orthonormality_defect(r.left_vectors) < 1e-9);
  CHECK(max_orthonormality_defect(r.right_vectors) < 1e-9);
}

}  // namespace

TEST_CASE("svd of a diagonal matrix") {
  const Matrix a(2, 2, {3.0, 0.0, 0.0, 1.0});
  const SvdResult r = svd(a);
  CHECK(r.singular_values[0] == doctest::Approx(3.0));
  CHECK(r.singular_values[1] == doctest::Approx(1.0));
  CHECK(r.left_vectors(0, 0) == doctest::Approx(1.0));
  CHECK(r.left_vectors(1, 0) == doctest::Approx(0.0));
  CHECK(r.right_vectors(0, 0) == doctest::Approx(1.0));
  CHECK(r.right_vectors(1, 0) == doctest::Approx(0.0));
  check_valid(a, r);
}

TEST_CASE("svd of the zero matrix completes an orthonormal basis") {
  const Matrix a(2, 3);
  const SvdResult r = svd(a);
  REQUIRE(r.singular_values.size() == 2);
  CHECK(r.singular_values[0] == 0.0);
  CHECK(r.singular_values[1] == 0.0);
  CHECK(r.left_vectors.rows() == 2);
  CHECK(r.left_vectors.cols() == 2);
  CHECK(r.right_vectors.rows() == 3);
  CHECK(r.right_vectors.cols() == 2);
  check_valid(a, r);
}

TEST_CASE("svd reconstructs random matrices of all aspect ratios") {
  Rng rng(42);
  for (const auto [m, n] : {std::pair<std::size_t, std::size_t>{15, 25},
                            {25, 15},
                            {10, 10},
                            {1, 7},
                            {7, 1},
                            {1, 1}}) {
    const Matrix a = rng.gaussian_matrix(m, n);
    check_valid(a, svd(a));
  }
}

TEST_CASE("svd handles rank-deficient input") {
  Rng rng(7);
  const Matrix u = rng.gaussian_matrix(6, 2);
  const Matrix v = rng.gaussian_matrix(2, 9);
  Matrix a(6, 9);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 2; ++k) s += u(i, k) * v(k, j);
      a(i, j) = s;
    }
  }
  const SvdResult r = svd(a);
  check_valid(a, r);
  CHECK(r.singular_values[2] < 1e-10 * r.singular_values[0]);
}

TEST_CASE("svd sign convention and determinism") {
  Rng rng(3);
  const Matrix a = rng.gaussian_matrix(8, 5);
  const SvdResult r1 = svd(a);
  const SvdResult r2 = svd(a);
  CHECK(r1.left_vectors == r2.left_vectors);
  CHECK(r1.right_vectors == r2.right_vectors);
  CHECK(r1.singular_values == r2.singular_values);
  for (std::size_t k = 0; k < r1.singular_values.size(); ++k) {
    double first = 0.0;
    for (std::size_t i = 0; i < r1.left_vectors.rows(); ++i) {
      if (r1.left_vectors(i, k) != 0.0) {
        first = r1.left_vectors(i, k);
        break;
      }
    }
    CHECK(first >= 0.0);
  }
}

TEST_CASE("svd rejects empty input") {
  CHECK_THROWS_AS(svd(Matrix()), std::invalid_argument);
}
