#pragma once

#include <span>

#include "popdyn/risk.hpp"
#include "popdyn/types.hpp"

namespace popdyn {

enum class LearnerKind { kRepeatedGd, kFullMin };

// gamma_t = base / (t + 1), or gamma_t = base throughout a run.
enum class StepForm { kInverseTime, kConstant };

enum class MinimizeMethod { kClosedFormQuadratic, kNewton };

struct StepSchedule {
  StepForm form = StepForm::kInverseTime;
  double base = 1.0;
};

/// Configuration of the per-learner parameter update.
struct LearnerRule {
  LearnerKind kind = LearnerKind::kFullMin;
  // repeated_gd
  StepSchedule schedule;
  int inner_steps = 1;
  // full_min
  MinimizeMethod method = MinimizeMethod::kClosedFormQuadratic;
  double tolerance = 1e-10;
  int max_iterations = 100;

  void Validate() const;
};

double step_size(int t, const StepSchedule& schedule);

/// theta - gamma_t * grad of the learner's mass-normalized mixture risk.
/// Throws EmptyLearner when the learner has no user mass.
Vector gradient_step(const Vector& theta_j, const Vector& alpha_col,
                     const Vector& beta, std::span<const RiskFunction> risks,
                     double gamma_t);

/// Minimizer of the learner's mixture risk.
///
/// The closed form solves (sum_i w_i A_i) theta = sum_i w_i A_i phi_i with
/// w_i = alpha_ij beta_i; it falls back to Newton when a supported risk is
/// not quadratic. Newton takes damped steps (halving until the risk does not
/// increase) and stops once the gradient norm is <= tolerance.
Vector full_minimize(const Vector& alpha_col, const Vector& beta,
                     std::span<const RiskFunction> risks,
                     MinimizeMethod method = MinimizeMethod::kClosedFormQuadratic,
                     double tolerance = 1e-10, int max_iterations = 100);

bool verify_learner_risk_reducing(const Vector& theta_before,
                                  const Vector& theta_after,
                                  const Vector& alpha_col, const Vector& beta,
                                  std::span<const RiskFunction> risks);

// Gradient of the mass-normalized mixture risk at theta.
Vector learner_risk_gradient(const Vector& alpha_col, const Vector& beta,
                             std::span<const RiskFunction> risks,
                             const Vector& theta);

// One outer update of learner j at time t under `rule`.
Vector apply_learner_rule(const LearnerRule& rule, int t, const Vector& theta_j,
                          const Vector& alpha_col, const Vector& beta,
                          std::span<const RiskFunction> risks);

}  // namespace popdyn
