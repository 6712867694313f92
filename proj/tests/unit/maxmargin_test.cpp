#include <doctest.h>

#include <cmath>

#include "nsd/errors.hpp"
#include "nsd/maxmargin.hpp"
#include "nsd/model.hpp"
#include "nsd/rng.hpp"

using namespace nsd::maxmargin;
using nsd::Rng;
using nsd::data::Dataset;
using nsd::la::Matrix;
using nsd::la::NormKind;

namespace {

Dataset toy_two_class_1d() {
  Dataset ds;
  ds.k = 2;
  ds.features = Matrix(2, 1, {1.0, -1.0});
  ds.labels = {1, 2};
  return ds;
}

Dataset two_class_2d(std::initializer_list<std::pair<double, double>> pts,
                     std::initializer_list<int> labels) {
  Dataset ds;
  ds.k = 2;
  std::vector<double> values;
  for (auto [x, y] : pts) {
    values.push_back(x);
    values.push_back(y);
  }
  ds.features = Matrix(pts.size(), 2, values);
  ds.labels = labels;
  return ds;
}

// Exhaustive oracle for k=2: the margin depends on the weight matrix only
// through the row difference u = w1 - w2, and for every norm here the
// cheapest unit-norm matrix realizing a given u is w1 = u/2 = -w2, which
// costs |u|_2 / sqrt(2) (frobenius, spectral, nuclear: the matrix is rank
// one) or |u|_inf / 2 (entrywise max). Sweeping the direction of u on a
// dense angular grid is therefore an exhaustive search of the unit ball.
double grid_oracle_margin(const Dataset& ds, NormKind kind) {
  constexpr int kAngles = 400000;
  double best = -1e300;
  for (int a = 0; a < kAngles; ++a) {
    const double theta = 2.0 * M_PI * a / kAngles;
    double u[2] = {std::cos(theta), std::sin(theta)};
    double scale;
    if (kind == NormKind::entrywise_max) {
      scale = 2.0 / std::max(std::abs(u[0]), std::abs(u[1]));
    } else {
      scale = std::sqrt(2.0);
    }
    u[0] *= scale;
    u[1] *= scale;
    double margin = 1e300;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      const double proj =
          u[0] * ds.features(i, 0) + u[1] * ds.features(i, 1);
      margin = std::min(margin, ds.labels[i] == 1 ? proj : -proj);
    }
    best = std::max(best, margin);
  }
  return best;
}

}  // namespace

TEST_CASE("subgradient on the toy picks the first achieving pair") {
  const Dataset ds = toy_two_class_1d();
  const Matrix g = margin_subgradient(Matrix(2, 1, {1.0, -1.0}), ds);
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(1, 0) == doctest::Approx(-1.0));
}

TEST_CASE("subgradient at zero weights uses the tie rule") {
  const Dataset ds = toy_two_class_1d();
  // All pairs tie at 0; pick sample 0, wrong class 2: +x_0 on row 1,
  // -x_0 on row 2.
  const Matrix g = margin_subgradient(Matrix(2, 1), ds);
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(1, 0) == doctest::Approx(-1.0));
}

TEST_CASE("directional derivative along the subgradient is <g, g>") {
  Rng rng(88);
  int checked = 0;
  while (checked < 10) {
    Dataset ds;
    ds.k = 3;
    ds.features = rng.gaussian_matrix(8, 4);
    ds.labels = {1, 2, 3, 1, 2, 3, 1, 2};
    const Matrix w = rng.gaussian_matrix(3, 4);
    // Require a unique active pair: second-smallest gap clearly separated.
    const auto m = nsd::model::margin(w, ds);
    double second = 1e300;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      for (int y = 1; y <= 3; ++y) {
        if (y == ds.labels[i]) continue;
        double gap = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
          gap += (w(ds.labels[i] - 1, j) - w(y - 1, j)) * ds.features(i, j);
        }
        if (i == m.sample && y == m.label) continue;
        second = std::min(second, gap);
      }
    }
    if (second - m.value < 1e-3) continue;
    ++checked;

    const Matrix g = margin_subgradient(w, ds);
    const double h = 1e-6;
    const auto m_up = nsd::model::margin(w + h * g, ds);
    const double fd = (m_up.value - m.value) / h;
    const double gg = nsd::la::dot(g, g);
    CHECK(fd == doctest::Approx(gg).epsilon(1e-4));
  }
}

TEST_CASE("solver matches the dense grid oracle on a 2-d toy") {
  const Dataset ds = two_class_2d({{1.0, 0.0}, {-1.0, 0.0}}, {1, 2});
  SolveConfig cfg;
  cfg.max_iters = 30000;
  cfg.patience = 5000;
  const ReferenceSolution ref =
      solve_max_margin(ds, NormKind::frobenius, cfg);
  CHECK(ref.margin_value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-2));
  // Optimal rows are +-(1/sqrt(2), 0).
  CHECK(std::abs(ref.w_star(0, 0) - 1.0 / std::sqrt(2.0)) < 2e-2);
  CHECK(std::abs(ref.w_star(1, 0) + 1.0 / std::sqrt(2.0)) < 2e-2);
  CHECK(std::abs(ref.w_star(0, 1)) < 2e-2);
  const double oracle = grid_oracle_margin(ds, NormKind::frobenius);
  CHECK(ref.margin_value == doctest::Approx(oracle).epsilon(1e-2));
}

TEST_CASE("solver agrees with the oracle on random tiny instances") {
  Rng rng(2023);
  for (int instance = 0; instance < 3; ++instance) {
    // Two points per class around opposite centers.
    const double cx = 0.6 + 0.2 * instance;
    Dataset ds = two_class_2d(
        {{cx + 0.3 * rng.gaussian(), 0.3 * rng.gaussian()},
         {cx + 0.3 * rng.gaussian(), 0.3 * rng.gaussian()},
         {-cx + 0.3 * rng.gaussian(), 0.3 * rng.gaussian()},
         {-cx + 0.3 * rng.gaussian(), 0.3 * rng.gaussian()}},
        {1, 1, 2, 2});
    for (NormKind kind : nsd::la::kAllNormKinds) {
      const double oracle = grid_oracle_margin(ds, kind);
      if (oracle <= 0.0) continue;  // rare non-separable draw
      SolveConfig cfg;
      cfg.max_iters = 40000;
      cfg.patience = 8000;
      cfg.seed = 11 + instance;
      const ReferenceSolution ref = solve_max_margin(ds, kind, cfg);
      CHECK(std::abs(ref.margin_value - oracle) <= 1e-2);
    }
  }
}

TEST_CASE("solver postconditions on separable data") {
  const Dataset ds = two_class_2d(
      {{1.0, 0.2}, {0.8, -0.4}, {-1.0, 0.1}, {-0.7, 0.5}}, {1, 1, 2, 2});
  for (NormKind kind : nsd::la::kAllNormKinds) {
    SolveConfig cfg;
    cfg.max_iters = 20000;
    cfg.patience = 4000;
    const ReferenceSolution ref = solve_max_margin(ds, kind, cfg);
    CHECK(ref.margin_value > 0.0);
    CHECK(std::abs(nsd::la::matrix_norm(ref.w_star, kind) - 1.0) <= 1e-6);
    // Recomputed margin matches the stored one.
    CHECK(nsd::model::margin(ref.w_star, ds).value ==
          doctest::Approx(ref.margin_value).epsilon(1e-9));
    // Incumbent trace is nondecreasing.
    for (std::size_t i = 1; i < ref.solve_trace.size(); ++i) {
      CHECK(ref.solve_trace[i].best_margin >=
            ref.solve_trace[i - 1].best_margin);
    }
  }
}

TEST_CASE("iterates stay inside the ball throughout the solve") {
  const Dataset ds = two_class_2d(
      {{1.0, 0.2}, {0.8, -0.4}, {-1.0, 0.1}, {-0.7, 0.5}}, {1, 1, 2, 2});
  for (NormKind kind : nsd::la::kAllNormKinds) {
    SolveConfig cfg;
    cfg.max_iters = 500;
    cfg.patience = 500;
    double worst = 0.0;
    cfg.observer = [&](std::size_t, const Matrix& w, double) {
      worst = std::max(worst, nsd::la::matrix_norm(w, kind));
    };
    solve_max_margin(ds, kind, cfg);
    CHECK(worst <= 1.0 + 1e-9);
  }
}

TEST_CASE("frobenius and entrywise solutions coincide for k=2, d=1") {
  const Dataset ds = toy_two_class_1d();
  SolveConfig cfg;
  cfg.max_iters = 20000;
  cfg.patience = 4000;
  const auto fro = solve_max_margin(ds, NormKind::frobenius, cfg);
  const auto emax = solve_max_margin(ds, NormKind::entrywise_max, cfg);
  // Same direction after Frobenius normalization (up to solver tolerance).
  Matrix a = fro.w_star;
  Matrix b = emax.w_star;
  a *= 1.0 / nsd::la::matrix_norm(a, NormKind::frobenius);
  b *= 1.0 / nsd::la::matrix_norm(b, NormKind::frobenius);
  if (a(0, 0) * b(0, 0) < 0.0) b *= -1.0;
  CHECK(nsd::la::matrix_norm(a - b, NormKind::frobenius) <= 1e-2);
}

TEST_CASE("renormalizing the incumbent preserves the relative margin") {
  const Dataset ds = two_class_2d(
      {{1.0, 0.2}, {0.8, -0.4}, {-1.0, 0.1}, {-0.7, 0.5}}, {1, 1, 2, 2});
  SolveConfig cfg;
  cfg.max_iters = 5000;
  cfg.patience = 2000;
  const auto ref = solve_max_margin(ds, NormKind::frobenius, cfg);
  const double rel =
      nsd::model::relative_margin(ref.w_star, ds, NormKind::frobenius);
  const auto scaled = ref.w_star * 3.7;
  CHECK(std::abs(nsd::model::relative_margin(scaled, ds, NormKind::frobenius) -
                 rel) <= 1e-9);
}

TEST_CASE("expect_positive raises on hopeless data") {
  Dataset ds;
  ds.k = 2;
  ds.features = Matrix(2, 2, {0.5, -0.25, 0.5, -0.25});
  ds.labels = {1, 2};
  SolveConfig cfg;
  cfg.max_iters = 2000;
  cfg.patience = 500;
  cfg.expect_positive = true;
  CHECK_THROWS_AS(solve_max_margin(ds, NormKind::frobenius, cfg),
                  nsd::SolverStallError);
}

TEST_CASE("solve_all_references returns one solution per norm") {
  const Dataset ds = two_class_2d(
      {{1.0, 0.2}, {0.8, -0.4}, {-1.0, 0.1}, {-0.7, 0.5}}, {1, 1, 2, 2});
  SolveConfig cfg;
  cfg.max_iters = 10000;
  cfg.patience = 3000;
  const auto refs = solve_all_references(ds, cfg);
  REQUIRE(refs.size() == 4);
  for (const auto& [kind, ref] : refs) {
    CHECK(ref.kind == kind);
    CHECK(ref.margin_value > 0.0);
  }
  // Deterministic given config and seed.
  const auto refs2 = solve_all_references(ds, cfg);
  for (const auto& [kind, ref] : refs) {
    CHECK(refs2.at(kind).w_star == ref.w_star);
  }
}

TEST_CASE("reference save/load round-trip") {
  const Dataset ds = toy_two_class_1d();
  SolveConfig cfg;
  cfg.max_iters = 5000;
  cfg.patience = 1000;
  const auto ref = solve_max_margin(ds, NormKind::nuclear, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "nsd_ref_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  save_reference(dir / "nuclear", ref, cfg.seed);
  const auto loaded = load_reference(dir / "nuclear");
  CHECK(loaded.w_star == ref.w_star);
  CHECK(loaded.kind == ref.kind);
  CHECK(loaded.margin_value == ref.margin_value);
  std::filesystem::remove_all(dir);
}
