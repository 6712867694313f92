#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nsd/dataset.hpp"
#include "nsd/matrix.hpp"
#include "nsd/model.hpp"
#include "nsd/norms.hpp"
#include "nsd/rng.hpp"

namespace nsd::optim {

/// How the nuclear-norm update direction is computed: from a full SVD of the
/// momentum, or from one warm-started power-iteration step per training step.
enum class NucgdMode { analytic, power };

std::string_view to_string(NucgdMode mode);
NucgdMode parse_nucgd_mode(std::string_view name);

struct NsdConfig {
  la::NormKind norm = la::NormKind::frobenius;
  double gamma0 = 0.1;    // base step size; gamma_t = gamma0 / sqrt(t + 1)
  double mu = 0.0;        // momentum weight in [0, 1)
  std::size_t batch_size = 0;  // 0 means full batch
  std::size_t max_steps = 20000;
  NucgdMode nucgd_mode = NucgdMode::analytic;
  double restart_tau = 1e-10;
  std::uint64_t seed = 1;
};

/// Optimizer trajectory state.
struct OptState {
  la::Matrix w;         // W_t
  la::Matrix momentum;  // M_t (M_{t-1} before the next step runs)
  std::vector<double> p;  // power vector, unit norm; empty outside power mode
  std::size_t t = 0;
  std::size_t restarts = 0;
  std::size_t skipped_steps = 0;  // zero-momentum steps recorded as no-ops
};

/// Norm-ball maximizer of <m, direction> at unit radius, with the achieved
/// pairing. The pairing equals the dual norm of m (the optimality
/// certificate for every geometry).
struct LmoResult {
  la::Matrix direction;
  double pairing = 0.0;
};

/// Throws ZeroMatrixError on the zero matrix.
LmoResult lmo(const la::Matrix& m, la::NormKind kind);

/// gamma_t = gamma0 / sqrt(t + 1).
double step_size(std::size_t t, double gamma0);

/// B indices drawn uniformly without replacement; B == n returns all indices
/// in order without consuming the RNG.
model::BatchIndex sample_batch(Rng& rng, std::size_t n, std::size_t batch);

/// One NSD step: sample a batch, accumulate momentum, move opposite the
/// unit-norm steepest direction scaled by gamma_t. A zero momentum matrix
/// becomes a recorded no-op step.
void nsd_step(OptState& st, const data::Dataset& ds, const NsdConfig& cfg,
              Rng& rng);

/// The SVD-free nuclear-norm step: one warm-started power-iteration step
/// yields the left vector, and the update is the rank-one matrix
/// p (p^T M) / |p^T M|. Collapsed directions trigger one random restart;
/// a second collapse raises DoubleDegeneracyError.
void nucgd_power_step(OptState& st, const data::Dataset& ds,
                      const NsdConfig& cfg, Rng& rng);

/// Runs from zero weights for cfg.max_steps, returning snapshots at t = 0
/// and after every step whose index appears in probe_steps (sorted,
/// 1-based step counts).
std::vector<OptState> run(const data::Dataset& ds, const NsdConfig& cfg,
                          std::span<const std::size_t> probe_steps);

}  // namespace nsd::optim
