#include "nsd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsd/errors.hpp"
#include "nsd/model.hpp"
#include "nsd/svd.hpp"

namespace nsd::metrics {

namespace {

std::vector<double> leading_left_vector(const la::Matrix& m) {
  const la::SvdResult r = la::svd(m);
  std::vector<double> u(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) u[i] = r.left_vectors(i, 0);
  return u;
}

// tan of the angle between unit vectors, folded into [0, pi/2].
double tan_angle(std::span<const double> a, std::span<const double> b) {
  const double c = std::min(std::abs(la::dot(a, b)), 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  if (c <= s / kTanCap) return kTanCap;
  return std::min(s / c, kTanCap);
}

}  // namespace

double correlation(const la::Matrix& w,
                   const maxmargin::ReferenceSolution& ref) {
  const double nw = la::matrix_norm(w, la::NormKind::frobenius);
  const double nr = la::matrix_norm(ref.w_star, la::NormKind::frobenius);
  if (nw == 0.0 || nr == 0.0) {
    throw ZeroMatrixError("correlation of a zero matrix");
  }
  return la::dot(w, ref.w_star) / (nw * nr);
}

double margin_error(const la::Matrix& w,
                    const maxmargin::ReferenceSolution& ref,
                    const data::Dataset& ds) {
  if (ref.margin_value <= 0.0) {
    throw std::invalid_argument("margin_error requires a positive reference margin");
  }
  const double ref_rel = model::relative_margin(ref.w_star, ds, ref.kind);
  const double w_rel = model::relative_margin(w, ds, ref.kind);
  return std::abs(w_rel - ref_rel) / ref_rel;
}

SpectrumResult spectrum(const la::Matrix& w) {
  const la::SvdResult r = la::svd(w);
  SpectrumResult out;
  out.singular_values = r.singular_values;
  if (!out.singular_values.empty()) {
    const double threshold = 0.05 * out.singular_values.front();
    for (double s : out.singular_values) {
      if (s > threshold) ++out.effective_rank;
    }
  }
  return out;
}

PowerDiag power_diagnostics(std::span<const double> p, const la::Matrix& m_now,
                            const la::Matrix* m_prev) {
  PowerDiag diag;
  const la::SvdResult r = la::svd(m_now);
  std::vector<double> u1(m_now.rows());
  for (std::size_t i = 0; i < m_now.rows(); ++i) u1[i] = r.left_vectors(i, 0);

  diag.e_t = tan_angle(p, u1);
  if (r.singular_values.size() >= 2 && r.singular_values.front() > 0.0) {
    diag.gap_ratio = r.singular_values[1] / r.singular_values[0];
  }
  if (m_prev != nullptr && !m_prev->empty()) {
    diag.delta_t = tan_angle(u1, leading_left_vector(*m_prev));
  }
  return diag;
}

ContractionResult contraction_check(const la::Matrix& m_now,
                                    std::span<const double> p_prev,
                                    std::span<const double> p_now) {
  const la::SvdResult r = la::svd(m_now);
  std::vector<double> u1(m_now.rows());
  for (std::size_t i = 0; i < m_now.rows(); ++i) u1[i] = r.left_vectors(i, 0);
  double rho = 0.0;
  if (r.singular_values.size() >= 2 && r.singular_values.front() > 0.0) {
    rho = r.singular_values[1] / r.singular_values[0];
  }
  const double lhs = tan_angle(p_now, u1);
  const double rhs = rho * rho * tan_angle(p_prev, u1) + 1e-9;
  return {lhs <= rhs, rhs - lhs};
}

double decay_slope(std::span<const std::pair<std::size_t, double>> trace) {
  if (trace.size() < 10) {
    throw std::invalid_argument("decay_slope needs at least 10 trace points");
  }
  std::size_t t_min = trace.front().first, t_max = trace.front().first;
  for (const auto& [t, _] : trace) {
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  }
  if (t_min == 0 || t_max < 10 * t_min) {
    throw std::invalid_argument("decay_slope trace must span at least a decade");
  }

  // Fit over the final decade only; earlier iterates are transient.
  const std::size_t window_start = t_max / 10;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  bool any_above_clamp = false;
  for (const auto& [t, err] : trace) {
    if (t < window_start) continue;
    const double clamped = std::max(err, 1e-15);
    if (clamped > 1e-15) any_above_clamp = true;
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(clamped);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) {
    throw std::invalid_argument("decay_slope window has fewer than 2 points");
  }
  if (!any_above_clamp) {
    throw DegenerateTraceError("all errors in the fit window are zero");
  }
  const double n = static_cast<double>(count);
  const double denom = sxx - sx * sx / n;
  if (denom == 0.0) {
    throw std::invalid_argument("decay_slope window has no spread in t");
  }
  return (sxy - sx * sy / n) / denom;
}

}  // namespace nsd::metrics
