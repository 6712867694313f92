#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "nsd/dataset.hpp"
#include "nsd/matrix.hpp"
#include "nsd/norms.hpp"

namespace nsd::maxmargin {

struct SolveConfig {
  std::size_t max_iters = 200000;
  double eta0 = 1.0;
  std::size_t patience = 20000;  // stall window on incumbent improvement
  double tol = 1e-9;             // improvement tolerance
  std::uint64_t seed = 2025;
  /// Stop as soon as the incumbent margin exceeds this (used by the
  /// separability check, which only needs a yes/no witness).
  double stop_margin = std::numeric_limits<double>::infinity();
  /// When true, failing to reach a positive margin raises SolverStallError
  /// (set by callers that have already certified separability).
  bool expect_positive = false;
  /// Optional per-iteration observer (iteration, current iterate, margin).
  std::function<void(std::size_t, const la::Matrix&, double)> observer;
};

struct TracePoint {
  std::size_t iteration = 0;
  double best_margin = 0.0;
};

/// A unit-norm max-margin matrix for one norm geometry, together with the
/// margin it achieves and the incumbent trace of the solve.
struct ReferenceSolution {
  la::Matrix w_star;
  la::NormKind kind = la::NormKind::frobenius;
  double margin_value = 0.0;
  std::vector<TracePoint> solve_trace;
  std::size_t iterations = 0;
  bool stalled = false;  // stopped via the patience window
};

/// Subgradient of the piecewise-linear margin at w: +x on the achieving
/// sample's label row, -x on the achieving wrong-class row, zero elsewhere.
la::Matrix margin_subgradient(const la::Matrix& w, const data::Dataset& ds);

/// Projected subgradient ascent of the margin over the unit ball of the
/// given norm, tracking the incumbent. The returned matrix is rescaled to
/// unit norm exactly.
ReferenceSolution solve_max_margin(const data::Dataset& ds, la::NormKind kind,
                                   const SolveConfig& cfg);

/// One reference per norm kind, solved independently (and concurrently) with
/// per-kind RNG streams derived from cfg.seed.
std::map<la::NormKind, ReferenceSolution> solve_all_references(
    const data::Dataset& ds, const SolveConfig& cfg);

/// Matrix CSV plus "<base>.manifest" (kind, margin, iterations, seed).
void save_reference(const std::filesystem::path& base_path,
                    const ReferenceSolution& ref, std::uint64_t seed);
ReferenceSolution load_reference(const std::filesystem::path& base_path);

}  // namespace nsd::maxmargin
