#include "popdyn/learner_rules.hpp"

#include <cmath>
#include <string>

#include "popdyn/error.hpp"
#include "popdyn/model.hpp"

namespace popdyn {
namespace {

// Unnormalized weights w_i = alpha_ij beta_i; throws on an empty learner.
Vector learner_weights(const Vector& alpha_col, const Vector& beta,
                       std::span<const RiskFunction> risks) {
  if (alpha_col.size() != beta.size() ||
      static_cast<size_t>(beta.size()) != risks.size()) {
    throw InvalidArgument("allocation column, beta and risks disagree on n");
  }
  Vector w = alpha_col.cwiseProduct(beta);
  if (!(w.sum() >= kEmptyLearnerMass)) {
    throw EmptyLearner(-1, "learner has no user mass");
  }
  return w;
}

// Unnormalized mixture risk sum_i w_i R_i(theta).
double weighted_risk(const Vector& w, std::span<const RiskFunction> risks,
                     const Vector& theta) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) acc += w[i] * risks[i].Value(theta);
  }
  return acc;
}

Vector closed_form(const Vector& w, std::span<const RiskFunction> risks) {
  const int d = risks.front().dim();
  Matrix lhs = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Matrix& a = risks[i].curvature();
    lhs += w[i] * a;
    rhs += w[i] * (a * risks[i].center());
  }
  return lhs.ldlt().solve(rhs);
}

Vector newton(const Vector& w, std::span<const RiskFunction> risks,
              double tolerance, int max_iterations) {
  const int d = risks.front().dim();
  const double mass = w.sum();
  Vector theta = Vector::Zero(d);
  // Start from the weighted mean of known minimizers when available.
  {
    Vector acc = Vector::Zero(d);
    double known = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w[i] != 0.0 && risks[i].has_center()) {
        acc += w[i] * risks[i].center();
        known += w[i];
      }
    }
    if (known > 0.0) theta = acc / known;
  }

  for (int iter = 0; iter <= max_iterations; ++iter) {
    Vector grad = Vector::Zero(d);
    Matrix hess = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      grad += w[i] * risks[i].Gradient(theta);
      hess += w[i] * risks[i].Hessian(theta);
    }
    if (grad.norm() / mass <= tolerance) return theta;
    if (iter == max_iterations) break;

    const Vector direction = hess.ldlt().solve(grad);
    const double current = weighted_risk(w, risks, theta);
    double t = 1.0;
    Vector candidate = theta - direction;
    while (weighted_risk(w, risks, candidate) > current && t > 1e-12) {
      t *= 0.5;
      candidate = theta - t * direction;
    }
    theta = candidate;
  }
  throw ConvergenceFailure("newton did not reach gradient tolerance within " +
                           std::to_string(max_iterations) + " iterations");
}

}  // namespace

void LearnerRule::Validate() const {
  if (kind == LearnerKind::kRepeatedGd) {
    if (!(schedule.base > 0.0)) throw InvalidArgument("step base must be > 0");
    if (inner_steps < 1) throw InvalidArgument("inner_steps must be >= 1");
  }
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be > 0");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
}

double step_size(int t, const StepSchedule& schedule) {
  if (t < 0) throw InvalidArgument("time index must be >= 0");
  switch (schedule.form) {
    case StepForm::kInverseTime:
      return schedule.base / (static_cast<double>(t) + 1.0);
    case StepForm::kConstant:
      return schedule.base;
  }
  throw InvalidArgument("unknown step form");
}

Vector learner_risk_gradient(const Vector& alpha_col, const Vector& beta,
                             std::span<const RiskFunction> risks,
                             const Vector& theta) {
  const Vector w = learner_weights(alpha_col, beta, risks);
  Vector grad = Vector::Zero(theta.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) grad += w[i] * risks[i].Gradient(theta);
  }
  return grad / w.sum();
}

Vector gradient_step(const Vector& theta_j, const Vector& alpha_col,
                     const Vector& beta, std::span<const RiskFunction> risks,
                     double gamma_t) {
  if (!(gamma_t > 0.0)) throw InvalidArgument("step size must be > 0");
  return theta_j - gamma_t * learner_risk_gradient(alpha_col, beta, risks, theta_j);
}

Vector full_minimize(const Vector& alpha_col, const Vector& beta,
                     std::span<const RiskFunction> risks, MinimizeMethod method,
                     double tolerance, int max_iterations) {
  const Vector w = learner_weights(alpha_col, beta, risks);
  if (method == MinimizeMethod::kClosedFormQuadratic) {
    bool all_quadratic = true;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w[i] != 0.0 && risks[i].kind() != RiskKind::kQuadratic) {
        all_quadratic = false;
      }
    }
    if (all_quadratic) return closed_form(w, risks);
  }
  return newton(w, risks, tolerance, max_iterations);
}

bool verify_learner_risk_reducing(const Vector& theta_before,
                                  const Vector& theta_after,
                                  const Vector& alpha_col, const Vector& beta,
                                  std::span<const RiskFunction> risks) {
  const double before = learner_avg_risk(alpha_col, beta, risks, theta_before);
  const double after = learner_avg_risk(alpha_col, beta, risks, theta_after);
  return after <= before + 1e-10;
}

Vector apply_learner_rule(const LearnerRule& rule, int t, const Vector& theta_j,
                          const Vector& alpha_col, const Vector& beta,
                          std::span<const RiskFunction> risks) {
  switch (rule.kind) {
    case LearnerKind::kRepeatedGd: {
      const double gamma = step_size(t, rule.schedule);
      Vector theta = theta_j;
      for (int k = 0; k < rule.inner_steps; ++k) {
        theta = gradient_step(theta, alpha_col, beta, risks, gamma);
      }
      return theta;
    }
    case LearnerKind::kFullMin:
      return full_minimize(alpha_col, beta, risks, rule.method, rule.tolerance,
                           rule.max_iterations);
  }
  throw InvalidArgument("unknown learner rule");
}

}  // namespace popdyn
