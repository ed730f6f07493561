#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "popdyn/engine.hpp"
#include "popdyn/model.hpp"

namespace popdyn {

enum class SplitPolicy {
  // Largest-mass learner that serves a subpopulation away from its own
  // optimum; plain largest mass when every learner is locally optimal.
  kLargestNonOptimal,
  // Largest user mass, ties to the lowest index.
  kLargestMass,
};

struct CompetitionOptions {
  int target_m = 0;
  double sigma = 1e-3;
  std::uint64_t seed = 0;
  int max_steps_per_phase = 100000;
  EquilibriumDetector detector;
  SplitPolicy policy = SplitPolicy::kLargestNonOptimal;
  // Allocation share and gradient norm above which a subpopulation counts as
  // served and non-optimal.
  double zero_tol = 1e-6;
  double gradient_tol = 1e-6;
};

struct CompetitionPhase {
  int m = 0;
  // Global step index at which the phase started (the split timestamp).
  long start_step = 0;
  int steps = 0;
  bool converged = false;
  double total_risk = 0.0;
  Vector subpop_risks;
  // Learner split after this phase; empty for the last phase.
  std::optional<int> split;
  // Some subpopulation served by the split learner has a non-zero gradient.
  bool split_hypothesis = false;
};

struct CompetitionResult {
  std::vector<CompetitionPhase> phases;
  SystemState final_state;
  // False when a phase ran out of steps; phases ends with that phase.
  bool completed = false;
};

// Learner the policy would split at `state`.
int choose_split_learner(const SystemState& state, const Scenario& scenario, SplitPolicy policy,
                         double zero_tol = 1e-6, double gradient_tol = 1e-6);

// True iff some subpopulation with share > zero_tol on learner j has
// gradient norm > gradient_tol at theta_j.
bool has_non_optimal_subpop(const SystemState& state, const Scenario& scenario, int j,
                            double zero_tol = 1e-6, double gradient_tol = 1e-6);

/// Alternates simulate-to-equilibrium with split_learner plus a seeded theta
/// perturbation of both copies until target_m learners have equilibrated.
CompetitionResult run_competition(const Scenario& scenario, const SystemState& initial,
                                  const CompetitionOptions& options);

}  // namespace popdyn
