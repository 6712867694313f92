#include "nsd/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nsd/errors.hpp"
#include "nsd/svd.hpp"

namespace nsd::la {

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::frobenius: return "frobenius";
    case NormKind::entrywise_max: return "entrywise_max";
    case NormKind::spectral: return "spectral";
    case NormKind::nuclear: return "nuclear";
  }
  throw std::invalid_argument("unknown NormKind");
}

NormKind parse_norm_kind(std::string_view name) {
  for (NormKind k : kAllNormKinds) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown norm kind: " + std::string(name));
}

double matrix_norm(const Matrix& m, NormKind kind) {
  switch (kind) {
    case NormKind::frobenius: {
      double sum = 0.0;
      for (double v : m.values()) sum += v * v;
      return std::sqrt(sum);
    }
    case NormKind::entrywise_max: {
      double mx = 0.0;
      for (double v : m.values()) mx = std::max(mx, std::abs(v));
      return mx;
    }
    case NormKind::spectral: {
      const SvdResult r = svd(m);
      return r.singular_values.empty() ? 0.0 : r.singular_values.front();
    }
    case NormKind::nuclear: {
      const SvdResult r = svd(m);
      return std::accumulate(r.singular_values.begin(),
                             r.singular_values.end(), 0.0);
    }
  }
  throw std::invalid_argument("unknown NormKind");
}

double entrywise_l1_norm(const Matrix& m) {
  double sum = 0.0;
  for (double v : m.values()) sum += std::abs(v);
  return sum;
}

double dual_norm(const Matrix& m, NormKind kind) {
  switch (kind) {
    case NormKind::frobenius: return matrix_norm(m, NormKind::frobenius);
    case NormKind::entrywise_max: return entrywise_l1_norm(m);
    case NormKind::spectral: return matrix_norm(m, NormKind::nuclear);
    case NormKind::nuclear: return matrix_norm(m, NormKind::spectral);
  }
  throw std::invalid_argument("unknown NormKind");
}

std::vector<double> project_sorted_l1_ball(std::span<const double> v,
                                           double radius) {
  std::vector<double> out(v.begin(), v.end());
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total <= radius) return out;
  // Largest prefix where the shifted value stays positive.
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    cum += out[j];
    const double th = (cum - radius) / static_cast<double>(j + 1);
    if (out[j] - th > 0.0) theta = th;
  }
  for (double& x : out) x = std::max(x - theta, 0.0);
  return out;
}

namespace {

Matrix reconstruct(const SvdResult& r, std::span<const double> sigma) {
  const std::size_t m = r.left_vectors.rows();
  const std::size_t n = r.right_vectors.rows();
  Matrix out(m, n);
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    if (sigma[k] == 0.0) continue;
    for (std::size_t i = 0; i < m; ++i) {
      const double us = r.left_vectors(i, k) * sigma[k];
      for (std::size_t j = 0; j < n; ++j) {
        out(i, j) += us * r.right_vectors(j, k);
      }
    }
  }
  return out;
}

}  // namespace

Matrix project_norm_ball(const Matrix& m, NormKind kind, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  switch (kind) {
    case NormKind::frobenius: {
      const double f = matrix_norm(m, NormKind::frobenius);
      if (f <= radius) return m;
      return m * (radius / f);
    }
    case NormKind::entrywise_max: {
      Matrix out = m;
      for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = std::clamp(out.data()[i], -radius, radius);
      }
      return out;
    }
    case NormKind::spectral: {
      const SvdResult r = svd(m);
      if (r.singular_values.empty() || r.singular_values.front() <= radius) {
        return m;
      }
      std::vector<double> clamped = r.singular_values;
      for (double& s : clamped) s = std::min(s, radius);
      return reconstruct(r, clamped);
    }
    case NormKind::nuclear: {
      const SvdResult r = svd(m);
      const double total = std::accumulate(r.singular_values.begin(),
                                           r.singular_values.end(), 0.0);
      if (total <= radius) return m;
      const std::vector<double> proj =
          project_sorted_l1_ball(r.singular_values, radius);
      return reconstruct(r, proj);
    }
  }
  throw std::invalid_argument("unknown NormKind");
}

std::vector<double> power_step(const Matrix& m, std::span<const double> p,
                               double tau_deg_factor) {
  if (p.size() != m.rows()) {
    throw std::invalid_argument("power_step: p length must equal m.rows()");
  }
  if (std::abs(norm2(p) - 1.0) > 1e-9) {
    throw std::invalid_argument("power_step: p must be unit norm");
  }
  const std::vector<double> q = matvec_transposed(m, p);
  std::vector<double> s = matvec(m, q);
  const double ns = norm2(s);
  const double f2 = [&] {
    double sum = 0.0;
    for (double v : m.values()) sum += v * v;
    return sum;
  }();
  if (ns <= tau_deg_factor * f2) {
    throw DegenerateDirectionError("power_step: projected direction collapsed");
  }
  for (double& x : s) x /= ns;
  return s;
}

}  // namespace nsd::la
