#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "popdyn/model.hpp"

namespace popdyn {

/// gamma_map[i] is the sole learner of subpopulation i.
struct SplitAssignment {
  std::vector<int> gamma_map;

  // Every learner in [0, m) serves at least one subpopulation.
  bool covers(int m) const;
  // Relabels learners in order of first appearance.
  SplitAssignment canonical() const;
  std::string ToString() const;  // e.g. "{1}/{2,3}" with 1-based indices

  bool operator==(const SplitAssignment&) const = default;
};

enum class Classification { kSplitMarket, kBalancedCandidate, kNonEquilibrium };

enum class Stability {
  kAsymptoticallyStable,
  kUnstable,
  kPossiblyStableNotAsymptotic,
};

const char* to_string(Classification c);
const char* to_string(Stability s);

struct EquilibriumReport {
  Classification classification = Classification::kNonEquilibrium;
  Stability stability = Stability::kUnstable;
  double total_risk = 0.0;
  Vector per_subpop_risks;
  // Total risk minus the enumerated optimum, once known.
  std::optional<double> welfare_gap;
  // Smallest R_i(theta_j) - R_i(theta_gamma(i)) over j != gamma(i); split
  // markets only (NaN otherwise, +inf with a single learner).
  double margin = 0.0;
  std::vector<std::string> notes;
  std::optional<SplitAssignment> assignment;
  Matrix theta;
};

struct ClassifyOptions {
  double zero_tol = 1e-6;
  double strict_margin = 1e-9;
  // Largest learner-risk gradient norm accepted as "theta is optimal".
  double optimality_tol = 1e-6;
};

// Minimizer of the total risk for fixed allocations. Rows of empty learners
// are copied from `fallback` when given, zero otherwise.
Matrix optimal_theta(const Matrix& alpha, const Vector& beta,
                     std::span<const RiskFunction> risks,
                     const Matrix* fallback = nullptr);

/// F(alpha) = min over theta of the total risk. Empty learners contribute 0.
double potential_value(const Matrix& alpha, const Vector& beta,
                       std::span<const RiskFunction> risks);
double potential_value(const AllocationMatrix& alpha, const Scenario& scenario);

/// dF/dalpha_ij = beta_i R_i(theta*_j(alpha)). Throws EmptyLearner.
Matrix potential_gradient(const Matrix& alpha, const Vector& beta,
                          std::span<const RiskFunction> risks);
Matrix potential_gradient(const AllocationMatrix& alpha, const Scenario& scenario);

/// Split-market / balanced / non-equilibrium verdict for a state whose
/// parameters already minimize the total risk given its allocations.
/// Throws InvalidArgument (listing gradient norms) otherwise.
EquilibriumReport classify_state(const SystemState& state, const Scenario& scenario,
                                 const ClassifyOptions& options = {});

// Right-hand side minus left-hand side of the closed-form stability
// inequality for the {1}/{2,3} partition of three isotropic quadratics.
double three_pop_stability_slack(const Vector& phi1, const Vector& phi2, const Vector& phi3,
                        double beta2, double beta3);
bool three_pop_stability_predicate(const Vector& phi1, const Vector& phi2,
                                    const Vector& phi3, double beta2, double beta3);

/// True iff the convex hulls of the centers of each pair of learner groups
/// are disjoint.
bool convex_hulls_disjoint(const SplitAssignment& partition,
                           std::span<const Vector> centers);
bool convex_hulls_disjoint(const SplitAssignment& partition,
                           const Scenario& scenario);

// Binary allocation for `assignment` with closed-form learner parameters.
SystemState state_for_assignment(const SplitAssignment& assignment,
                                 const Scenario& scenario);

/// Every surjective assignment of subpopulations to learners, classified and
/// sorted by total risk (ascending, stable). With dedupe only the
/// first-occurrence canonical labeling of each partition is kept. Each
/// report's welfare_gap is relative to the first row. Throws BudgetExceeded
/// when m^n exceeds `budget`.
std::vector<EquilibriumReport> enumerate_split_equilibria(
    const Scenario& scenario, bool dedupe = true, double budget = 2e7,
    const ClassifyOptions& options = {});

// Fixed-point total risk minus the enumerated optimum. Throws InvalidState
// when that is below -1e-8, which would mean the oracle missed a better point.
double welfare_gap(const std::vector<EquilibriumReport>& reports,
                   double fixed_point_total_risk);

/// Duplicates learner j: the copy is appended as learner m with the same
/// parameters and half of j's allocations; j keeps the other half.
std::pair<SystemState, Scenario> split_learner(const SystemState& state,
                                               const Scenario& scenario, int j);

}  // namespace popdyn
