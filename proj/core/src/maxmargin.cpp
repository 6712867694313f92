#include "nsd/maxmargin.hpp"

#include <cmath>
#include <future>
#include <stdexcept>
#include <string>
#include <utility>

#include "nsd/errors.hpp"
#include "nsd/io.hpp"
#include "nsd/model.hpp"
#include "nsd/rng.hpp"

namespace nsd::maxmargin {

la::Matrix margin_subgradient(const la::Matrix& w, const data::Dataset& ds) {
  const model::MarginResult m = model::margin(w, ds);
  la::Matrix g(w.rows(), w.cols());
  const auto x = ds.features.row(m.sample);
  const std::size_t own = static_cast<std::size_t>(ds.labels[m.sample] - 1);
  const std::size_t other = static_cast<std::size_t>(m.label - 1);
  for (std::size_t j = 0; j < w.cols(); ++j) {
    g(own, j) = x[j];
    g(other, j) = -x[j];
  }
  return g;
}

ReferenceSolution solve_max_margin(const data::Dataset& ds, la::NormKind kind,
                                   const SolveConfig& cfg) {
  if (cfg.max_iters == 0 || cfg.eta0 <= 0.0 || cfg.patience == 0 ||
      cfg.tol <= 0.0) {
    throw std::invalid_argument("SolveConfig fields must be positive");
  }
  Rng rng(cfg.seed);
  // Zero weights have a fully tied subgradient; a small seeded draw breaks
  // the degeneracy deterministically.
  la::Matrix w =
      la::project_norm_ball(0.1 * rng.gaussian_matrix(ds.k, ds.dim()), kind, 1.0);

  ReferenceSolution out;
  out.kind = kind;
  out.w_star = w;
  out.margin_value = model::margin(w, ds).value;
  out.solve_trace.push_back({0, out.margin_value});
  std::size_t last_improvement = 0;

  std::size_t j = 0;
  for (; j < cfg.max_iters; ++j) {
    if (out.margin_value > cfg.stop_margin) break;
    if (j - last_improvement > cfg.patience) {
      out.stalled = true;
      break;
    }
    const la::Matrix g = margin_subgradient(w, ds);
    const double eta = cfg.eta0 / std::sqrt(static_cast<double>(j + 1));
    w = la::project_norm_ball(w + eta * g, kind, 1.0);
    const double m = model::margin(w, ds).value;
    if (cfg.observer) cfg.observer(j, w, m);
    if (m > out.margin_value + cfg.tol) {
      out.margin_value = m;
      out.w_star = w;
      last_improvement = j;
      out.solve_trace.push_back({j + 1, m});
    }
  }
  out.iterations = j;

  const double norm = la::matrix_norm(out.w_star, kind);
  if (norm > 0.0) {
    out.w_star *= 1.0 / norm;
    out.margin_value = model::margin(out.w_star, ds).value;
  }
  if (cfg.expect_positive && out.margin_value <= 0.0) {
    throw SolverStallError(
        "max-margin solver did not reach a positive margin under the " +
        std::string(la::to_string(kind)) + " norm: best " +
        io::format_double(out.margin_value) + " after " +
        std::to_string(out.iterations) + " iterations");
  }
  return out;
}

std::map<la::NormKind, ReferenceSolution> solve_all_references(
    const data::Dataset& ds, const SolveConfig& cfg) {
  std::map<la::NormKind, std::future<ReferenceSolution>> futures;
  for (std::size_t i = 0; i < la::kAllNormKinds.size(); ++i) {
    const la::NormKind kind = la::kAllNormKinds[i];
    SolveConfig per_kind = cfg;
    per_kind.seed = cfg.seed + i;  // independent deterministic streams
    futures.emplace(kind, std::async(std::launch::async, [&ds, kind, per_kind] {
                      return solve_max_margin(ds, kind, per_kind);
                    }));
  }
  std::map<la::NormKind, ReferenceSolution> out;
  std::string failures;
  for (auto& [kind, fut] : futures) {
    try {
      out.emplace(kind, fut.get());
    } catch (const std::exception& e) {
      failures += std::string(la::to_string(kind)) + ": " + e.what() + "; ";
    }
  }
  if (!failures.empty()) {
    throw SolverStallError("reference solves failed: " + failures);
  }
  return out;
}

void save_reference(const std::filesystem::path& base_path,
                    const ReferenceSolution& ref, std::uint64_t seed) {
  io::save_matrix_csv(base_path.string() + ".csv", ref.w_star);
  io::KvMap kv;
  kv["kind"] = std::string(la::to_string(ref.kind));
  kv["margin_value"] = io::format_double(ref.margin_value);
  kv["iterations"] = std::to_string(ref.iterations);
  kv["stalled"] = ref.stalled ? "true" : "false";
  kv["seed"] = std::to_string(seed);
  io::save_kv_file(base_path.string() + ".manifest", kv);
}

ReferenceSolution load_reference(const std::filesystem::path& base_path) {
  ReferenceSolution ref;
  ref.w_star = io::load_matrix_csv(base_path.string() + ".csv");
  const io::KvMap kv = io::load_kv_file(base_path.string() + ".manifest");
  ref.kind = la::parse_norm_kind(kv.at("kind"));
  ref.margin_value = io::parse_double(kv.at("margin_value"));
  ref.iterations = std::stoull(kv.at("iterations"));
  ref.stalled = kv.at("stalled") == "true";
  return ref;
}

}  // namespace nsd::maxmargin
