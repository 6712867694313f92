#include "nsd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nsd/errors.hpp"

namespace nsd::model {

namespace {

void check_dims(const la::Matrix& w, const data::Dataset& ds) {
  if (w.rows() != static_cast<std::size_t>(ds.k) || w.cols() != ds.dim()) {
    throw std::invalid_argument("weights shape does not match dataset");
  }
}

void check_batch(const BatchIndex& batch, std::size_t n) {
  if (batch.indices.empty()) throw std::invalid_argument("empty batch");
  for (std::size_t i : batch.indices) {
    if (i >= n) throw std::invalid_argument("batch index out of range");
  }
}

}  // namespace

BatchIndex full_batch(std::size_t n) {
  BatchIndex b;
  b.indices.resize(n);
  std::iota(b.indices.begin(), b.indices.end(), std::size_t{0});
  return b;
}

double ce_loss(const la::Matrix& w, const data::Dataset& ds,
               const BatchIndex& batch) {
  check_dims(w, ds);
  check_batch(batch, ds.n());
  const std::size_t k = w.rows();
  std::vector<double> logits(k);
  double total = 0.0;
  for (std::size_t idx : batch.indices) {
    const auto x = ds.features.row(idx);
    for (std::size_t c = 0; c < k; ++c) logits[c] = la::dot(w.row(c), x);
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double a : logits) sum += std::exp(a - mx);
    const double lse = mx + std::log(sum);
    total += lse - logits[static_cast<std::size_t>(ds.labels[idx] - 1)];
  }
  return total / static_cast<double>(batch.indices.size());
}

la::Matrix ce_gradient(const la::Matrix& w, const data::Dataset& ds,
                       const BatchIndex& batch) {
  check_dims(w, ds);
  check_batch(batch, ds.n());
  const std::size_t k = w.rows();
  const std::size_t d = w.cols();
  la::Matrix g(k, d);
  std::vector<double> probs(k);
  const double inv_b = 1.0 / static_cast<double>(batch.indices.size());
  for (std::size_t idx : batch.indices) {
    const auto x = ds.features.row(idx);
    for (std::size_t c = 0; c < k; ++c) probs[c] = la::dot(w.row(c), x);
    const double mx = *std::max_element(probs.begin(), probs.end());
    double sum = 0.0;
    for (double& a : probs) {
      a = std::exp(a - mx);
      sum += a;
    }
    for (double& a : probs) a /= sum;
    probs[static_cast<std::size_t>(ds.labels[idx] - 1)] -= 1.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double coeff = probs[c] * inv_b;
      if (coeff == 0.0) continue;
      auto grow = g.row(c);
      for (std::size_t j = 0; j < d; ++j) grow[j] += coeff * x[j];
    }
  }
  return g;
}

MarginResult margin(const la::Matrix& w, const data::Dataset& ds) {
  check_dims(w, ds);
  const std::size_t k = w.rows();
  std::vector<double> logits(k);
  MarginResult best;
  bool first = true;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto x = ds.features.row(i);
    for (std::size_t c = 0; c < k; ++c) logits[c] = la::dot(w.row(c), x);
    const double own = logits[static_cast<std::size_t>(ds.labels[i] - 1)];
    for (std::size_t c = 0; c < k; ++c) {
      if (static_cast<int>(c) + 1 == ds.labels[i]) continue;
      const double gap = own - logits[c];
      if (first || gap < best.value) {
        best.value = gap;
        best.sample = i;
        best.label = static_cast<int>(c) + 1;
        first = false;
      }
    }
  }
  return best;
}

double relative_margin(const la::Matrix& w, const data::Dataset& ds,
                       la::NormKind kind) {
  const double norm = la::matrix_norm(w, kind);
  if (norm == 0.0) {
    throw ZeroNormError("relative margin of a zero-norm weight matrix");
  }
  return margin(w, ds).value / norm;
}

double accuracy(const la::Matrix& w, const data::Dataset& ds) {
  check_dims(w, ds);
  const std::size_t k = w.rows();
  std::vector<double> logits(k);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto x = ds.features.row(i);
    for (std::size_t c = 0; c < k; ++c) logits[c] = la::dot(w.row(c), x);
    const double own = logits[static_cast<std::size_t>(ds.labels[i] - 1)];
    bool strict = true;
    for (std::size_t c = 0; c < k; ++c) {
      if (static_cast<int>(c) + 1 == ds.labels[i]) continue;
      if (logits[c] >= own) {
        strict = false;
        break;
      }
    }
    if (strict) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.n());
}

}  // namespace nsd::model
