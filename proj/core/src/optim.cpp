#include "nsd/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nsd/errors.hpp"
#include "nsd/svd.hpp"

namespace nsd::optim {

namespace {

// Singular directions below this fraction of sigma_1 are excluded from the
// spectral-norm LMO so numerical noise is not amplified into full-rank
// orthogonal updates.
constexpr double kSpectralRankCutoff = 1e-10;

void validate(const NsdConfig& cfg, std::size_t n) {
  if (cfg.gamma0 <= 0.0) throw std::invalid_argument("gamma0 must be positive");
  if (cfg.mu < 0.0 || cfg.mu >= 1.0) {
    throw std::invalid_argument("mu must lie in [0, 1)");
  }
  if (cfg.batch_size > n) {
    throw std::invalid_argument("batch_size exceeds dataset size");
  }
  if (cfg.restart_tau <= 0.0) {
    throw std::invalid_argument("restart_tau must be positive");
  }
}

std::size_t effective_batch(const NsdConfig& cfg, std::size_t n) {
  return cfg.batch_size == 0 ? n : cfg.batch_size;
}

la::Matrix momentum_update(const la::Matrix& m_prev, const la::Matrix& g,
                           double mu) {
  return mu * m_prev + (1.0 - mu) * g;
}

}  // namespace

std::string_view to_string(NucgdMode mode) {
  return mode == NucgdMode::analytic ? "analytic" : "power";
}

NucgdMode parse_nucgd_mode(std::string_view name) {
  if (name == "analytic") return NucgdMode::analytic;
  if (name == "power") return NucgdMode::power;
  throw std::invalid_argument("unknown nucgd mode: " + std::string(name));
}

LmoResult lmo(const la::Matrix& m, la::NormKind kind) {
  if (la::matrix_norm(m, la::NormKind::frobenius) == 0.0) {
    throw ZeroMatrixError("lmo of the zero matrix");
  }
  LmoResult out;
  switch (kind) {
    case la::NormKind::frobenius: {
      const double f = la::matrix_norm(m, la::NormKind::frobenius);
      out.direction = m * (1.0 / f);
      break;
    }
    case la::NormKind::entrywise_max: {
      out.direction = la::Matrix(m.rows(), m.cols());
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double v = m.data()[i];
        out.direction.data()[i] = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      }
      break;
    }
    case la::NormKind::spectral: {
      const la::SvdResult r = la::svd(m);
      const double cutoff = kSpectralRankCutoff * r.singular_values.front();
      la::Matrix dir(m.rows(), m.cols());
      for (std::size_t k = 0; k < r.singular_values.size(); ++k) {
        if (r.singular_values[k] <= cutoff) break;
        for (std::size_t i = 0; i < m.rows(); ++i) {
          const double u = r.left_vectors(i, k);
          for (std::size_t j = 0; j < m.cols(); ++j) {
            dir(i, j) += u * r.right_vectors(j, k);
          }
        }
      }
      out.direction = std::move(dir);
      break;
    }
    case la::NormKind::nuclear: {
      const la::SvdResult r = la::svd(m);
      std::vector<double> u(m.rows()), v(m.cols());
      for (std::size_t i = 0; i < m.rows(); ++i) u[i] = r.left_vectors(i, 0);
      for (std::size_t j = 0; j < m.cols(); ++j) v[j] = r.right_vectors(j, 0);
      out.direction = la::outer(u, v);
      break;
    }
  }
  out.pairing = la::dot(m, out.direction);
  return out;
}

double step_size(std::size_t t, double gamma0) {
  return gamma0 / std::sqrt(static_cast<double>(t + 1));
}

model::BatchIndex sample_batch(Rng& rng, std::size_t n, std::size_t batch) {
  if (batch == 0 || batch > n) {
    throw std::invalid_argument("batch size must lie in [1, n]");
  }
  if (batch == n) return model::full_batch(n);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  model::BatchIndex out;
  out.indices.resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t j = i + rng.next_below(n - i);
    std::swap(pool[i], pool[j]);
    out.indices[i] = pool[i];
  }
  return out;
}

void nsd_step(OptState& st, const data::Dataset& ds, const NsdConfig& cfg,
              Rng& rng) {
  validate(cfg, ds.n());
  const model::BatchIndex batch =
      sample_batch(rng, ds.n(), effective_batch(cfg, ds.n()));
  const la::Matrix g = model::ce_gradient(st.w, ds, batch);
  st.momentum = momentum_update(st.momentum, g, cfg.mu);
  const double gamma = step_size(st.t, cfg.gamma0);
  try {
    const LmoResult d = lmo(st.momentum, cfg.norm);
    st.w -= gamma * d.direction;
  } catch (const ZeroMatrixError&) {
    ++st.skipped_steps;
  }
  ++st.t;
}

void nucgd_power_step(OptState& st, const data::Dataset& ds,
                      const NsdConfig& cfg, Rng& rng) {
  validate(cfg, ds.n());
  if (cfg.norm != la::NormKind::nuclear || cfg.nucgd_mode != NucgdMode::power) {
    throw std::invalid_argument("nucgd_power_step requires nuclear/power mode");
  }
  if (st.p.size() != st.w.rows()) {
    throw std::invalid_argument("power vector length must equal row count");
  }
  const model::BatchIndex batch =
      sample_batch(rng, ds.n(), effective_batch(cfg, ds.n()));
  const la::Matrix g = model::ce_gradient(st.w, ds, batch);
  st.momentum = momentum_update(st.momentum, g, cfg.mu);

  const double m_frob = la::matrix_norm(st.momentum, la::NormKind::frobenius);
  std::vector<double> p_next;
  std::vector<double> row;  // p^T M
  double row_norm = 0.0;
  bool ok = false;
  for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
    if (attempt == 1) {
      // Random restart: resample the projection vector and retry once.
      st.p = rng.gaussian_vector(st.w.rows());
      la::normalize(st.p);
      ++st.restarts;
    }
    try {
      p_next = la::power_step(st.momentum, st.p);
      row = la::matvec_transposed(st.momentum, p_next);
      row_norm = la::norm2(row);
      ok = row_norm >= cfg.restart_tau * m_frob;
    } catch (const DegenerateDirectionError&) {
      ok = false;
    }
  }
  if (!ok) {
    throw DoubleDegeneracyError(
        "power iteration collapsed twice at step " + std::to_string(st.t) +
        "; momentum is effectively zero");
  }

  const double gamma = step_size(st.t, cfg.gamma0);
  for (double& x : row) x /= row_norm;
  st.w -= gamma * la::outer(p_next, row);
  st.p = std::move(p_next);
  ++st.t;
}

std::vector<OptState> run(const data::Dataset& ds, const NsdConfig& cfg,
                          std::span<const std::size_t> probe_steps) {
  validate(cfg, ds.n());
  const std::size_t k = static_cast<std::size_t>(ds.k);
  Rng rng(cfg.seed);

  OptState st;
  st.w = la::Matrix(k, ds.dim());
  st.momentum = la::Matrix(k, ds.dim());
  const bool power_mode = cfg.norm == la::NormKind::nuclear &&
                          cfg.nucgd_mode == NucgdMode::power;
  if (power_mode) {
    st.p = rng.gaussian_vector(k);
    la::normalize(st.p);
  }

  std::vector<OptState> snapshots;
  snapshots.push_back(st);
  std::size_t probe_pos = 0;
  while (probe_pos < probe_steps.size() && probe_steps[probe_pos] == 0) {
    ++probe_pos;
  }
  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    if (power_mode) {
      nucgd_power_step(st, ds, cfg, rng);
    } else {
      nsd_step(st, ds, cfg, rng);
    }
    if (probe_pos < probe_steps.size() && probe_steps[probe_pos] == step) {
      snapshots.push_back(st);
      ++probe_pos;
    }
  }
  return snapshots;
}

}  // namespace nsd::optim
