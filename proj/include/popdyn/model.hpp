#pragma once

#include <span>
#include <vector>

#include "popdyn/allocation_rules.hpp"
#include "popdyn/learner_rules.hpp"
#include "popdyn/risk.hpp"
#include "popdyn/schedule.hpp"
#include "popdyn/types.hpp"

namespace popdyn {

/// Row-stochastic n x m matrix of participation shares.
class AllocationMatrix {
 public:
  // Validates every row; throws InvalidState naming the first bad row.
  explicit AllocationMatrix(Matrix entries);

  static AllocationMatrix Uniform(int n, int m);
  // Row i puts all mass on learner assignment[i].
  static AllocationMatrix FromAssignment(std::span<const int> assignment, int m);

  int rows() const { return static_cast<int>(entries_.rows()); }
  int cols() const { return static_cast<int>(entries_.cols()); }
  double operator()(int i, int j) const { return entries_(i, j); }
  Vector row(int i) const { return entries_.row(i).transpose(); }
  Vector col(int j) const { return entries_.col(j); }
  const Matrix& matrix() const { return entries_; }

  bool operator==(const AllocationMatrix& other) const {
    return entries_ == other.entries_;
  }

 private:
  Matrix entries_;
};

/// Immutable problem instance.
class Scenario {
 public:
  Scenario(Vector beta, std::vector<RiskFunction> risks, int m,
           AllocationRule subpop_rule = {}, LearnerRule learner_rule = {},
           UpdateSchedule schedule = {});

  int n() const { return static_cast<int>(beta_.size()); }
  int m() const { return m_; }
  int d() const { return d_; }
  const Vector& beta() const { return beta_; }
  std::span<const RiskFunction> risks() const { return risks_; }
  const RiskFunction& risk(int i) const { return risks_[i]; }
  const AllocationRule& subpop_rule() const { return subpop_rule_; }
  const LearnerRule& learner_rule() const { return learner_rule_; }
  const UpdateSchedule& schedule() const { return schedule_; }

  // Same population and rules with a different learner count.
  Scenario WithLearners(int m) const;
  Scenario WithRules(AllocationRule subpop_rule, LearnerRule learner_rule) const;

 private:
  Vector beta_;
  std::vector<RiskFunction> risks_;
  int m_;
  int d_;
  AllocationRule subpop_rule_;
  LearnerRule learner_rule_;
  UpdateSchedule schedule_;
};

/// Allocations plus all learner parameters (theta is m x d, one row per
/// learner) at time step t.
struct SystemState {
  AllocationMatrix alpha;
  Matrix theta;
  int t = 0;

  Vector theta_of(int j) const { return theta.row(j).transpose(); }
};

// Throws InvalidArgument when the state's shape disagrees with the scenario.
void check_consistent(const SystemState& state, const Scenario& scenario);

// sum_j alpha_ij R_i(theta_j); theta_all is m x d.
double subpop_avg_risk(const Vector& alpha_row, const Matrix& theta_all,
                       const RiskFunction& risk);

// sum_i alpha_ij beta_i
double learner_mass(const Vector& alpha_col, const Vector& beta);

/// Mass-normalized mixture risk seen by a learner at theta_j.
/// Throws EmptyLearner when the learner's mass is below kEmptyLearnerMass.
double learner_avg_risk(const Vector& alpha_col, const Vector& beta,
                        std::span<const RiskFunction> risks,
                        const Vector& theta_j);

// sum_i sum_j beta_i alpha_ij R_i(theta_j)
double total_risk(const SystemState& state, const Scenario& scenario);

// n x m matrix with entries R_i(theta_j).
Matrix risk_matrix(const Matrix& theta, const Scenario& scenario);

}  // namespace popdyn
