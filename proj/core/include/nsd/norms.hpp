#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "nsd/matrix.hpp"

namespace nsd::la {

/// The four norm geometries the optimizers and reference solvers work in.
enum class NormKind { frobenius, entrywise_max, spectral, nuclear };

inline constexpr std::array<NormKind, 4> kAllNormKinds = {
    NormKind::frobenius, NormKind::entrywise_max, NormKind::spectral,
    NormKind::nuclear};

std::string_view to_string(NormKind kind);
NormKind parse_norm_kind(std::string_view name);

double matrix_norm(const Matrix& m, NormKind kind);

/// Entrywise l1 norm, the dual of entrywise_max. Not a NormKind of its own;
/// exposed for dual-pairing checks.
double entrywise_l1_norm(const Matrix& m);

/// Value of the dual norm of m: frobenius -> frobenius, entrywise_max ->
/// entrywise l1, spectral -> nuclear, nuclear -> spectral.
double dual_norm(const Matrix& m, NormKind kind);

/// Euclidean (Frobenius-metric) projection of m onto {A : |A|_kind <= radius}.
/// Matrices already inside the ball are returned unchanged.
Matrix project_norm_ball(const Matrix& m, NormKind kind, double radius);

/// Projection of v onto the l1 ball of the given radius, for v sorted
/// nonincreasing and nonnegative (sort-and-threshold simplex projection).
std::vector<double> project_sorted_l1_ball(std::span<const double> v,
                                           double radius);

/// One power-iteration step: returns m m^T p normalized to unit length,
/// computed as two matrix-vector products. p must be unit norm (within 1e-9)
/// of length m.rows(). Throws DegenerateDirectionError when |m m^T p| falls
/// at or below tau_deg_factor * |m|_F^2 (which also covers m = 0).
std::vector<double> power_step(const Matrix& m, std::span<const double> p,
                               double tau_deg_factor = 1e-12);

}  // namespace nsd::la
