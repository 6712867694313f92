#pragma once

#include <cstddef>
#include <vector>

#include "nsd/dataset.hpp"
#include "nsd/matrix.hpp"
#include "nsd/norms.hpp"

namespace nsd::model {

/// Sample indices of one mini-batch (0-based positions into the dataset).
struct BatchIndex {
  std::vector<std::size_t> indices;
};

BatchIndex full_batch(std::size_t n);

/// Mean cross-entropy of the linear classifier over the batch, computed with
/// max-subtracted softmax so it stays finite for arbitrarily large weights.
double ce_loss(const la::Matrix& w, const data::Dataset& ds,
               const BatchIndex& batch);

/// Mean softmax-residual gradient over the batch, a k x d matrix.
la::Matrix ce_gradient(const la::Matrix& w, const data::Dataset& ds,
                       const BatchIndex& batch);

/// Multiclass margin: the minimum logit gap over all (sample, wrong class)
/// pairs, plus the achieving pair. Ties resolve to the lexicographically
/// first (sample, label) pair so downstream subgradients are deterministic.
struct MarginResult {
  double value = 0.0;
  std::size_t sample = 0;  // 0-based index of the achieving sample
  int label = 0;           // 1-based wrong class achieving the minimum
};

MarginResult margin(const la::Matrix& w, const data::Dataset& ds);

/// margin(w) / |w|_kind. Throws ZeroNormError when the norm is zero.
double relative_margin(const la::Matrix& w, const data::Dataset& ds,
                       la::NormKind kind);

/// Fraction of samples whose label logit strictly exceeds every other logit;
/// ties count as incorrect.
double accuracy(const la::Matrix& w, const data::Dataset& ds);

}  // namespace nsd::model
