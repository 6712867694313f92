#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nsd/matrix.hpp"

namespace nsd {

/// Seedable random source with a frozen algorithm: mt19937_64 for raw bits,
/// 53-bit uniforms, and the Box-Muller transform for standard normals (the
/// second value of each pair is cached). All draws are sequenced on a single
/// stream, so a given seed fully determines every sample.
class Rng {
 public:
  static constexpr const char* kGeneratorName = "mt19937_64-boxmuller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_raw() { return engine_(); }

  /// Uniform double in [0, 1), 53 significant bits.
  double uniform();

  /// Standard normal via Box-Muller.
  double gaussian();

  /// Uniform integer in [0, n), unbiased (rejection sampling). n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  std::vector<double> gaussian_vector(std::size_t n);

  /// Row-major draw order.
  la::Matrix gaussian_matrix(std::size_t rows, std::size_t cols);

 private:
  std::mt19937_64 engine_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace nsd
