#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "nsd/errors.hpp"
#include "nsd/io.hpp"
#include "nsd/matrix.hpp"
#include "nsd/rng.hpp"

using namespace nsd::la;
namespace io = nsd::io;
using nsd::Rng;

TEST_CASE("matrix construction validates size and finiteness") {
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Matrix(1, 1, {std::nan("")}), std::invalid_argument);
  const Matrix m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  for (double v : m.values()) CHECK(v == 0.0);
}

TEST_CASE("matrix arithmetic and transpose") {
  const Matrix a(2, 2, {1.0, 2.0, 3.0, 4.0});
  const Matrix b(2, 2, {0.5, 0.5, 0.5, 0.5});
  const Matrix c = a + b * 2.0;
  CHECK(c(0, 0) == doctest::Approx(2.0));
  CHECK(c(1, 1) == doctest::Approx(5.0));
  const Matrix t = a.transposed();
  CHECK(t(0, 1) == 3.0);
  CHECK(dot(a, b) == doctest::Approx(5.0));
}

TEST_CASE("matvec agrees with transposed matvec") {
  Rng rng(99);
  const Matrix m = rng.gaussian_matrix(4, 7);
  const std::vector<double> x = rng.gaussian_vector(7);
  const std::vector<double> y = rng.gaussian_vector(4);
  // <y, Mx> == <M^T y, x>
  CHECK(dot(std::span<const double>(y), std::span<const double>(matvec(m, x))) ==
        doctest::Approx(dot(std::span<const double>(matvec_transposed(m, y)),
                            std::span<const double>(x))));
}

TEST_CASE("format_double round-trips exactly") {
  Rng rng(1234);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.next_below(40) - 20.0);
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::parse_double(io::format_double(0.0)) == 0.0);
  CHECK(io::parse_double(io::format_double(1e-300)) == 1e-300);
}

TEST_CASE("matrix CSV round-trips bit-exactly") {
  Rng rng(77);
  const Matrix m = rng.gaussian_matrix(5, 8);
  CHECK(io::matrix_from_csv(io::matrix_to_csv(m)) == m);
}

TEST_CASE("kv manifests parse and render") {
  const std::string text = "# comment\n b = 2 \na=1\n\n";
  const io::KvMap kv = io::parse_kv(text);
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "2");
  CHECK(io::render_kv(kv) == "a=1\nb=2\n");
  CHECK_THROWS_AS(io::parse_kv("no equals sign"), std::invalid_argument);
}

TEST_CASE("atomic writes leave no temp file") {
  const auto dir = std::filesystem::temp_directory_path() / "nsd_io_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "x.txt";
  io::write_file_atomic(path, "hello");
  CHECK(io::read_file(path) == "hello");
  CHECK(!std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("rng is deterministic and seed-sensitive") {
  Rng a(1), b(1), c(2);
  for (int i = 0; i < 100; ++i) {
    const double va = a.gaussian();
    CHECK(va == b.gaussian());
    (void)c.gaussian();
  }
  Rng a2(1), c2(2);
  bool differs = false;
  for (int i = 0; i < 10; ++i) {
    if (a2.gaussian() != c2.gaussian()) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("gaussian moments are plausible") {
  Rng rng(2024);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum2 += g * g;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("next_below stays in range and covers values") {
  Rng rng(8);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) ++counts[rng.next_below(5)];
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("normalize rejects the zero vector") {
  std::vector<double> z(3, 0.0);
  CHECK_THROWS_AS(normalize(z), nsd::ZeroNormError);
}
