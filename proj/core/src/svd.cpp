#include "nsd/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "nsd/errors.hpp"

namespace nsd::la {

namespace {

constexpr int kMaxSweeps = 100;
// Relative off-diagonal tolerance: a column pair counts as orthogonal when
// |<wp, wq>| <= tol * |wp| * |wq|. Jacobi converges quadratically, so a
// near-machine-epsilon tolerance is reachable in a handful of sweeps.
constexpr double kOrthTol = 1e-14;

// Core one-sided Jacobi (Hestenes) on an m x n matrix with m >= n:
// orthogonalize the columns of a working copy by plane rotations,
// accumulating them into V.
SvdResult svd_tall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix w = a;
  Matrix v = Matrix::identity(n);

  // Columns annihilated down to rounding noise are treated as converged:
  // rotating eps-level leftovers against dominant columns cycles forever.
  // They are zeroed and rebuilt by the basis completion below.
  double fro2 = 0.0;
  for (double x : w.values()) fro2 += x * x;
  const double noise2 =
      fro2 * (static_cast<double>(n) * 2.2e-16) * (static_cast<double>(n) * 2.2e-16);

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          alpha += wp * wp;
          beta += wq * wq;
          gamma += wp * wq;
        }
        if (alpha <= noise2 || beta <= noise2) continue;
        if (std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
        converged = false;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) {
    throw SvdConvergenceError("one-sided Jacobi SVD did not converge within " +
                              std::to_string(kMaxSweeps) + " sweeps");
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += w(i, j) * w(i, j);
    sigma[j] = sum <= noise2 ? 0.0 : std::sqrt(sum);
  }

  // Stable index sort: nonincreasing sigma, original order on ties.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return sigma[x] > sigma[y];
  });

  SvdResult out;
  out.singular_values.resize(n);
  out.left_vectors = Matrix(m, n);
  out.right_vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.singular_values[k] = sigma[j];
    for (std::size_t i = 0; i < n; ++i) out.right_vectors(i, k) = v(i, j);
    if (sigma[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) {
        out.left_vectors(i, k) = w(i, j) / sigma[j];
      }
    }
  }

  // Exactly-zero columns (rank deficiency) sort to the end; complete the
  // left basis with standard basis vectors orthogonalized against the
  // columns already placed.
  for (std::size_t k = 0; k < n; ++k) {
    if (out.singular_values[k] > 0.0) continue;
    for (std::size_t seed = 0; seed < m; ++seed) {
      std::vector<double> u(m, 0.0);
      u[seed] = 1.0;
      for (std::size_t k2 = 0; k2 < k; ++k2) {
        double proj = 0.0;
        for (std::size_t i = 0; i < m; ++i) proj += u[i] * out.left_vectors(i, k2);
        for (std::size_t i = 0; i < m; ++i) u[i] -= proj * out.left_vectors(i, k2);
      }
      double nrm = 0.0;
      for (double x : u) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm > 0.5) {
        for (std::size_t i = 0; i < m; ++i) out.left_vectors(i, k) = u[i] / nrm;
        break;
      }
    }
  }
  return out;
}

void apply_sign_convention(SvdResult& r) {
  const std::size_t m = r.left_vectors.rows();
  const std::size_t n = r.right_vectors.rows();
  for (std::size_t k = 0; k < r.singular_values.size(); ++k) {
    double first = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (r.left_vectors(i, k) != 0.0) {
        first = r.left_vectors(i, k);
        break;
      }
    }
    if (first < 0.0) {
      for (std::size_t i = 0; i < m; ++i) r.left_vectors(i, k) = -r.left_vectors(i, k);
      for (std::size_t i = 0; i < n; ++i) r.right_vectors(i, k) = -r.right_vectors(i, k);
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& a) {
  if (a.empty()) throw std::invalid_argument("svd of an empty matrix");
  SvdResult r;
  if (a.rows() >= a.cols()) {
    r = svd_tall(a);
  } else {
    SvdResult t = svd_tall(a.transposed());
    r.left_vectors = std::move(t.right_vectors);
    r.singular_values = std::move(t.singular_values);
    r.right_vectors = std::move(t.left_vectors);
  }
  apply_sign_convention(r);
  return r;
}

}  // namespace nsd::la
