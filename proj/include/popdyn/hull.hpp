#pragma once

#include <span>

#include "popdyn/types.hpp"

namespace popdyn {

/// Phase-one simplex: does { x >= 0 : A x = b } have a point? The residual
/// of the auxiliary problem is compared against `tol`.
bool linear_feasible(const Matrix& A, const Vector& b, double tol = 1e-9);

/// True iff conv(a) and conv(b) share a point, decided as the feasibility of
/// sum_k lambda_k a_k = sum_l mu_l b_l over two probability vectors.
bool convex_hulls_intersect(std::span<const Vector> a, std::span<const Vector> b,
                            double tol = 1e-9);

}  // namespace popdyn
