#include <doctest.h>

#include <cmath>

#include "nsd/dataset.hpp"
#include "nsd/errors.hpp"
#include "nsd/model.hpp"
#include "nsd/rng.hpp"

using namespace nsd::model;
using nsd::Rng;
using nsd::ZeroNormError;
using nsd::data::Dataset;
using nsd::la::Matrix;
using nsd::la::NormKind;

namespace {

Dataset toy_two_class() {
  Dataset ds;
  ds.k = 2;
  ds.features = Matrix(2, 1, {1.0, -1.0});
  ds.labels = {1, 2};
  return ds;
}

Dataset random_dataset(Rng& rng, int k, int d, int n) {
  Dataset ds;
  ds.k = k;
  ds.features = rng.gaussian_matrix(n, d);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.labels[i] = 1 + static_cast<int>(rng.next_below(k));
  }
  // Guarantee every class appears.
  for (int y = 1; y <= k; ++y) ds.labels[y - 1] = y;
  return ds;
}

}  // namespace

TEST_CASE("zero weights give log k loss") {
  Rng rng(6);
  const Dataset ds = random_dataset(rng, 15, 25, 40);
  const Matrix w(15, 25);
  CHECK(ce_loss(w, ds, full_batch(ds.n())) ==
        doctest::Approx(std::log(15.0)).epsilon(1e-12));
  CHECK(std::log(15.0) == doctest::Approx(2.70805).epsilon(1e-5));
}

TEST_CASE("loss decreases as a correct sample's weights scale up") {
  Dataset ds;
  ds.k = 2;
  ds.features = Matrix(1, 1, {1.0});
  ds.labels = {1};
  double prev = std::log(2.0) + 1.0;
  for (double c : {0.5, 1.0, 2.0, 4.0}) {
    const Matrix w(2, 1, {c, -c});
    const double loss = ce_loss(w, ds, full_batch(1));
    CHECK(loss < prev);
    prev = loss;
  }
}

TEST_CASE("two-point toy loss matches scalar arithmetic") {
  const Dataset ds = toy_two_class();
  const Matrix w(2, 1, {1.0, -1.0});
  BatchIndex first;
  first.indices = {0};
  CHECK(ce_loss(w, ds, first) ==
        doctest::Approx(std::log(1.0 + std::exp(-2.0))).epsilon(1e-12));
  CHECK(std::log(1.0 + std::exp(-2.0)) ==
        doctest::Approx(0.12693).epsilon(1e-4));
}

TEST_CASE("gradient at zero weights for one sample") {
  Dataset ds;
  ds.k = 2;
  ds.features = Matrix(1, 2, {1.0, 0.0});
  ds.labels = {1};
  const Matrix g = ce_gradient(Matrix(2, 2), ds, full_batch(1));
  CHECK(g(0, 0) == doctest::Approx(-0.5));
  CHECK(g(0, 1) == doctest::Approx(0.0));
  CHECK(g(1, 0) == doctest::Approx(0.5));
  CHECK(g(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("gradient rows sum to the zero row vector") {
  Rng rng(17);
  const Dataset ds = random_dataset(rng, 5, 7, 30);
  const Matrix w = rng.gaussian_matrix(5, 7);
  BatchIndex batch;
  for (int i = 0; i < 12; ++i) {
    batch.indices.push_back(rng.next_below(30));
  }
  const Matrix g = ce_gradient(w, ds, batch);
  for (std::size_t j = 0; j < g.cols(); ++j) {
    double col_sum = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) col_sum += g(i, j);
    CHECK(col_sum == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(2718);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 3 + static_cast<int>(rng.next_below(3));
    const int d = 2 + static_cast<int>(rng.next_below(4));
    const Dataset ds = random_dataset(rng, k, d, 12);
    Matrix w = rng.gaussian_matrix(k, d);
    BatchIndex batch;
    const std::size_t b = 1 + rng.next_below(12);
    for (std::size_t i = 0; i < b; ++i) {
      batch.indices.push_back(rng.next_below(12));
    }
    const Matrix g = ce_gradient(w, ds, batch);
    const double h = 1e-5;
    double num = 0.0, denom = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) {
      for (std::size_t j = 0; j < w.cols(); ++j) {
        const double orig = w(i, j);
        w(i, j) = orig + h;
        const double up = ce_loss(w, ds, batch);
        w(i, j) = orig - h;
        const double down = ce_loss(w, ds, batch);
        w(i, j) = orig;
        const double fd = (up - down) / (2.0 * h);
        num += (fd - g(i, j)) * (fd - g(i, j));
        denom += g(i, j) * g(i, j);
      }
    }
    CHECK(std::sqrt(num) <= 1e-6 * std::max(1.0, std::sqrt(denom)));
  }
}

TEST_CASE("margin on the toy and its homogeneity") {
  const Dataset ds = toy_two_class();
  const Matrix w(2, 1, {1.0, -1.0});
  const MarginResult m = margin(w, ds);
  CHECK(m.value == doctest::Approx(2.0));
  CHECK(margin(Matrix(2, 1), ds).value == 0.0);
  const MarginResult scaled = margin(w * 3.5, ds);
  CHECK(scaled.value == doctest::Approx(3.5 * m.value));
}

TEST_CASE("margin reports the lexicographically first achieving pair") {
  const Dataset ds = toy_two_class();
  // Both (i=0, y=2) and (i=1, y=1) achieve gap 2; the first sample wins.
  const MarginResult m = margin(Matrix(2, 1, {1.0, -1.0}), ds);
  CHECK(m.sample == 0);
  CHECK(m.label == 2);
  // At zero weights every pair ties at 0: smallest sample, smallest label.
  const MarginResult z = margin(Matrix(2, 1), ds);
  CHECK(z.sample == 0);
  CHECK(z.label == 2);
}

TEST_CASE("relative margin values and scale invariance") {
  const Dataset ds = toy_two_class();
  const Matrix w(2, 1, {1.0, -1.0});
  CHECK(relative_margin(w, ds, NormKind::frobenius) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(relative_margin(w * 7.0, ds, NormKind::frobenius) ==
        doctest::Approx(std::sqrt(2.0)));
  // Rank one: nuclear norm equals frobenius norm here.
  CHECK(relative_margin(w, ds, NormKind::nuclear) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(relative_margin(Matrix(2, 1), ds, NormKind::frobenius),
                  ZeroNormError);
}

TEST_CASE("accuracy with the tie rule") {
  const Dataset ds = toy_two_class();
  CHECK(accuracy(Matrix(2, 1, {1.0, -1.0}), ds) == 1.0);
  CHECK(accuracy(Matrix(2, 1), ds) == 0.0);  // all logits tie
}

TEST_CASE("positive margin iff perfect accuracy") {
  Rng rng(404);
  const Dataset ds = random_dataset(rng, 4, 3, 20);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix w = rng.gaussian_matrix(4, 3);
    const bool positive = margin(w, ds).value > 0.0;
    const bool perfect = accuracy(w, ds) == 1.0;
    CHECK(positive == perfect);
  }
}

TEST_CASE("loss is invariant to adding the same vector to every row") {
  Rng rng(31);
  const Dataset ds = random_dataset(rng, 4, 5, 15);
  const Matrix w = rng.gaussian_matrix(4, 5);
  const std::vector<double> shift = rng.gaussian_vector(5);
  Matrix shifted = w;
  for (std::size_t i = 0; i < shifted.rows(); ++i) {
    for (std::size_t j = 0; j < shifted.cols(); ++j) {
      shifted(i, j) += shift[j];
    }
  }
  CHECK(ce_loss(shifted, ds, full_batch(15)) ==
        doctest::Approx(ce_loss(w, ds, full_batch(15))).epsilon(1e-12));
}
