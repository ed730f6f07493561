#include "popdyn/simplex.hpp"

#include <cmath>
#include <sstream>

#include "popdyn/error.hpp"

namespace popdyn {

bool on_simplex(const Vector& row, double tol) {
  if (row.size() == 0 || !row.allFinite()) return false;
  if (row.minCoeff() < -tol) return false;
  return std::abs(row.sum() - 1.0) <= tol;
}

void require_simplex(const Vector& row, const char* what) {
  if (!on_simplex(row)) {
    std::ostringstream os;
    os.precision(17);
    os << what << " is not on the simplex (sum=" << row.sum() << ")";
    throw InvalidState(os.str());
  }
}

Vector renormalize(const Vector& row) {
  Vector out = row.cwiseMax(0.0);
  const double s = out.sum();
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw NumericUnderflow("cannot renormalize a row with no positive mass");
  }
  return out / s;
}

}  // namespace popdyn
