#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "nsd/matrix.hpp"

namespace nsd::data {

/// Parameters of the synthetic multiclass mixture: k Gaussian class centers
/// drawn from N(0, I_d), then n_per_class points per class from
/// N(center, sigma^2 I_d).
struct GenConfig {
  int k = 15;
  int d = 25;
  int n_per_class = 50;
  double sigma = 0.1;
  std::uint64_t seed = 12344;
};

struct Dataset {
  la::Matrix features;      // n x d, row per point
  std::vector<int> labels;  // length n, values in [1, k]
  int k = 0;
  la::Matrix centers;  // k x d (empty when loaded from CSV)
  GenConfig config;

  std::size_t n() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
};

/// Deterministic given cfg.seed. Draw order is frozen: all centers first
/// (row-major), then points class by class.
Dataset generate(const GenConfig& cfg);

struct SeparabilityReport {
  bool separable = false;
  std::optional<la::Matrix> witness;
  double witness_margin = 0.0;
};

/// Decides linear separability by running the entrywise-max max-margin
/// solver and thresholding the achieved margin. Throws
/// SeparabilityInconclusiveError when the solver exhausts its budget while
/// the margin is still below -tol and still improving.
SeparabilityReport check_separability(const Dataset& ds, double tol = 1e-6);

/// CSV with header y,x_1,...,x_d plus a "<path>.manifest" sidecar recording
/// the GenConfig and generator name. Labels are 1-based.
void save_dataset(const std::filesystem::path& csv_path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& csv_path);

}  // namespace nsd::data
