#pragma once

#include <Eigen/Dense>

namespace popdyn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Rows of an allocation matrix must sum to one within this tolerance.
inline constexpr double kSimplexTolerance = 1e-10;

// A learner whose user mass sum_i alpha_ij * beta_i falls below this is empty.
inline constexpr double kEmptyLearnerMass = 1e-12;

}  // namespace popdyn
