#include "popdyn/hull.hpp"

#include <vector>

#include "popdyn/error.hpp"

namespace popdyn {

bool linear_feasible(const Matrix& A, const Vector& b, double tol) {
  const Eigen::Index rows = A.rows();
  const Eigen::Index cols = A.cols();
  if (b.size() != rows) throw InvalidArgument("rhs length differs from A rows");
  constexpr double kPivotEps = 1e-12;

  // Columns: original variables, one artificial per row, then the rhs.
  const Eigen::Index rhs = cols + rows;
  Matrix t = Matrix::Zero(rows + 1, rhs + 1);
  std::vector<Eigen::Index> basis(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    t.row(i).head(cols) = sign * A.row(i);
    t(i, cols + i) = 1.0;
    t(i, rhs) = sign * b[i];
    basis[i] = cols + i;
  }
  // Reduced costs of minimizing the sum of artificials.
  for (Eigen::Index i = 0; i < rows; ++i) {
    t.row(rows).head(cols) -= t.row(i).head(cols);
    t(rows, rhs) -= t(i, rhs);
  }

  const int max_pivots = 50 * static_cast<int>(rows + cols + 1);
  for (int it = 0; it < max_pivots; ++it) {
    // Bland's rule: lowest-index improving column.
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < rhs; ++j) {
      if (t(rows, j) < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (t(i, enter) <= kPivotEps) continue;
      const double ratio = t(i, rhs) / t(i, enter);
      if (leave < 0 || ratio < best_ratio - kPivotEps ||
          (ratio <= best_ratio + kPivotEps && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) break;

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= rows; ++i) {
      if (i != leave && t(i, enter) != 0.0) {
        t.row(i) -= t(i, enter) * t.row(leave);
      }
    }
    basis[leave] = enter;
  }
  return -t(rows, rhs) <= tol;
}

bool convex_hulls_intersect(std::span<const Vector> a, std::span<const Vector> b,
                            double tol) {
  if (a.empty() || b.empty()) return false;
  const Eigen::Index d = a.front().size();
  const Eigen::Index p = static_cast<Eigen::Index>(a.size());
  const Eigen::Index q = static_cast<Eigen::Index>(b.size());
  Matrix A = Matrix::Zero(d + 2, p + q);
  Vector rhs = Vector::Zero(d + 2);
  for (Eigen::Index k = 0; k < p; ++k) {
    if (a[k].size() != d) throw InvalidArgument("points disagree on dimension");
    A.col(k).head(d) = a[k];
    A(d, k) = 1.0;
  }
  for (Eigen::Index l = 0; l < q; ++l) {
    if (b[l].size() != d) throw InvalidArgument("points disagree on dimension");
    A.col(p + l).head(d) = -b[l];
    A(d + 1, p + l) = 1.0;
  }
  rhs[d] = 1.0;
  rhs[d + 1] = 1.0;
  return linear_feasible(A, rhs, tol);
}

}  // namespace popdyn
