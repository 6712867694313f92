#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nsd/dataset.hpp"
#include "nsd/matrix.hpp"
#include "nsd/maxmargin.hpp"
#include "nsd/norms.hpp"

namespace nsd::metrics {

/// Tangents of angles are capped here instead of reported as infinity so
/// traces stay serializable; hitting the cap flags an orthogonal collapse.
inline constexpr double kTanCap = 1e15;

/// Per-probe measurements of one trajectory snapshot.
struct MetricsReport {
  std::size_t step = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  std::map<la::NormKind, double> correlations;
  std::map<la::NormKind, double> margin_errors;
  std::vector<double> spectrum;  // nonincreasing singular values of W
  std::size_t effective_rank = 0;
  std::optional<double> power_alignment;  // |<p_t, u_1(M_t)>|
  std::optional<double> gap_ratio;
  std::optional<double> e_t;
  std::optional<double> delta_t;
  std::size_t restarts = 0;
};

/// Frobenius cosine similarity. Throws ZeroMatrixError when either side has
/// zero norm.
double correlation(const la::Matrix& w, const maxmargin::ReferenceSolution& ref);

/// |m_v(W) - m_v(W*)| / m_v(W*) under ref.kind.
double margin_error(const la::Matrix& w,
                    const maxmargin::ReferenceSolution& ref,
                    const data::Dataset& ds);

struct SpectrumResult {
  std::vector<double> singular_values;
  std::size_t effective_rank = 0;  // count of sigma_i > 0.05 * sigma_1
};

SpectrumResult spectrum(const la::Matrix& w);

/// Power-iteration diagnostics: tangents of the tracking angle and of the
/// drift of the dominant left singular vector, plus the spectral gap ratio.
/// Angles are folded into [0, pi/2] (cosines taken in absolute value), so
/// the SVD sign convention cannot flip them.
struct PowerDiag {
  double e_t = 0.0;      // tan angle(p, u_1(m_now))
  double delta_t = 0.0;  // tan angle(u_1(m_now), u_1(m_prev)); 0 if no m_prev
  double gap_ratio = 0.0;  // sigma_2 / sigma_1 of m_now
  bool restart_flag = false;
};

PowerDiag power_diagnostics(std::span<const double> p, const la::Matrix& m_now,
                            const la::Matrix* m_prev);

/// Checks the per-step tangent contraction of power iteration:
/// tan angle(p_now, u_1) <= gap_ratio^2 * tan angle(p_prev, u_1) + 1e-9,
/// for p_now = power_step(m_now, p_prev).
struct ContractionResult {
  bool holds = false;
  double slack = 0.0;  // rhs - lhs
};

ContractionResult contraction_check(const la::Matrix& m_now,
                                    std::span<const double> p_prev,
                                    std::span<const double> p_now);

/// Least-squares slope of log(error) against log(step) over the final decade
/// of the trace. Errors are clamped at 1e-15 before the log; a window whose
/// errors are all at the clamp raises DegenerateTraceError.
double decay_slope(std::span<const std::pair<std::size_t, double>> trace);

}  // namespace nsd::metrics
