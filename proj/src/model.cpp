#include "popdyn/model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "popdyn/error.hpp"
#include "popdyn/simplex.hpp"

namespace popdyn {

AllocationMatrix::AllocationMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.cols() == 0) {
    throw InvalidState("allocation matrix must be non-empty");
  }
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    const Vector r = entries_.row(i).transpose();
    if (!on_simplex(r) || r.maxCoeff() > 1.0 + kSimplexTolerance) {
      const std::string msg = "allocation row " + std::to_string(i) +
                              " is not on the simplex (sum=" +
                              std::to_string(r.sum()) + ")";
      throw InvalidState(msg);
    }
  }
}

AllocationMatrix AllocationMatrix::Uniform(int n, int m) {
  return AllocationMatrix(Matrix::Constant(n, m, 1.0 / m));
}

AllocationMatrix AllocationMatrix::FromAssignment(std::span<const int> assignment,
                                                  int m) {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(assignment.size()), m);
  for (size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] < 0 || assignment[i] >= m) {
      throw InvalidArgument("assignment index out of range");
    }
    a(static_cast<Eigen::Index>(i), assignment[i]) = 1.0;
  }
  return AllocationMatrix(std::move(a));
}

Scenario::Scenario(Vector beta, std::vector<RiskFunction> risks, int m,
                   AllocationRule subpop_rule, LearnerRule learner_rule,
                   UpdateSchedule schedule)
    : beta_(std::move(beta)),
      risks_(std::move(risks)),
      m_(m),
      d_(0),
      subpop_rule_(subpop_rule),
      learner_rule_(learner_rule),
      schedule_(std::move(schedule)) {
  const int n = static_cast<int>(beta_.size());
  if (n == 0) throw InvalidArgument("scenario needs at least one subpopulation");
  if (static_cast<int>(risks_.size()) != n) {
    throw InvalidArgument("expected " + std::to_string(n) + " risks, got " +
                          std::to_string(risks_.size()));
  }
  if (m_ < 1 || m_ > n) {
    throw InvalidArgument("learner count must satisfy 1 <= m <= n");
  }
  for (int i = 0; i < n; ++i) {
    if (!(beta_[i] > 0.0)) {
      throw InvalidArgument("beta[" + std::to_string(i) + "] must be > 0");
    }
  }
  if (std::abs(beta_.sum() - 1.0) > 1e-12) {
    throw InvalidArgument("betas must sum to 1");
  }
  d_ = risks_.front().dim();
  for (const auto& r : risks_) {
    if (r.dim() != d_) throw InvalidArgument("risks disagree on dimension");
  }
  subpop_rule_.Validate();
  learner_rule_.Validate();
  schedule_.Validate(n, m_);
}

Scenario Scenario::WithLearners(int m) const {
  UpdateSchedule schedule = schedule_;
  if (schedule.kind == ScheduleKind::kRoundRobinLearners ||
      schedule.kind == ScheduleKind::kCustomOrder) {
    schedule.learner_order.clear();
  }
  return Scenario(beta_, risks_, m, subpop_rule_, learner_rule_, schedule);
}

Scenario Scenario::WithRules(AllocationRule subpop_rule,
                             LearnerRule learner_rule) const {
  return Scenario(beta_, risks_, m_, subpop_rule, learner_rule, schedule_);
}

void check_consistent(const SystemState& state, const Scenario& scenario) {
  if (state.alpha.rows() != scenario.n() || state.alpha.cols() != scenario.m()) {
    throw InvalidArgument("allocation matrix shape disagrees with scenario");
  }
  if (state.theta.rows() != scenario.m() || state.theta.cols() != scenario.d()) {
    throw InvalidArgument("learner parameters must be m x d");
  }
}

double subpop_avg_risk(const Vector& alpha_row, const Matrix& theta_all,
                       const RiskFunction& risk) {
  require_simplex(alpha_row, "allocation row");
  if (alpha_row.size() != theta_all.rows()) {
    throw InvalidArgument("allocation row length differs from learner count");
  }
  double acc = 0.0;
  for (Eigen::Index j = 0; j < alpha_row.size(); ++j) {
    if (alpha_row[j] != 0.0) {
      acc += alpha_row[j] * risk.Value(theta_all.row(j).transpose());
    }
  }
  return acc;
}

double learner_mass(const Vector& alpha_col, const Vector& beta) {
  if (alpha_col.size() != beta.size()) {
    throw InvalidArgument("allocation column length differs from beta");
  }
  return alpha_col.dot(beta);
}

double learner_avg_risk(const Vector& alpha_col, const Vector& beta,
                        std::span<const RiskFunction> risks,
                        const Vector& theta_j) {
  if (static_cast<size_t>(beta.size()) != risks.size()) {
    throw InvalidArgument("beta and risks disagree on n");
  }
  const double mass = learner_mass(alpha_col, beta);
  if (!(mass >= kEmptyLearnerMass)) {
    throw EmptyLearner(-1, "learner has no user mass");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double w = alpha_col[i] * beta[i];
    if (w != 0.0) acc += w * risks[i].Value(theta_j);
  }
  return acc / mass;
}

double total_risk(const SystemState& state, const Scenario& scenario) {
  check_consistent(state, scenario);
  const Matrix r = risk_matrix(state.theta, scenario);
  double acc = 0.0;
  for (int i = 0; i < scenario.n(); ++i) {
    for (int j = 0; j < scenario.m(); ++j) {
      acc += scenario.beta()[i] * state.alpha(i, j) * r(i, j);
    }
  }
  return acc;
}

Matrix risk_matrix(const Matrix& theta, const Scenario& scenario) {
  if (theta.cols() != scenario.d()) {
    throw InvalidArgument("learner parameters have wrong dimension");
  }
  Matrix r(scenario.n(), theta.rows());
  for (int j = 0; j < theta.rows(); ++j) {
    const Vector tj = theta.row(j).transpose();
    for (int i = 0; i < scenario.n(); ++i) r(i, j) = scenario.risk(i).Value(tj);
  }
  return r;
}

}  // namespace popdyn
