#pragma once

#include "popdyn/types.hpp"

namespace popdyn {

// Nonnegative entries (within -tol) summing to one within tol.
bool on_simplex(const Vector& row, double tol = kSimplexTolerance);

// Throws InvalidState naming `what` when the row is off the simplex.
void require_simplex(const Vector& row, const char* what);

// Clips to nonnegative and rescales to unit sum. All-zero rows are rejected.
Vector renormalize(const Vector& row);

}  // namespace popdyn
