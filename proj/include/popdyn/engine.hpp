#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popdyn/model.hpp"

namespace popdyn {

/// Declares equilibrium once max(|d alpha|_inf, |d theta|_inf) <= tolerance
/// for `window` consecutive steps.
struct EquilibriumDetector {
  double state_tolerance = 1e-9;
  int window = 10;

  void Validate() const;
};

// Counters for the per-agent risk-reduction assertions run inside step().
struct ContractStats {
  long allocation_checks = 0;
  long allocation_failures = 0;
  long learner_checks = 0;
  long learner_failures = 0;
  long empty_learner_freezes = 0;

  ContractStats& operator+=(const ContractStats& other);
};

struct EngineOptions {
  bool check_contracts = true;
  double monotonicity_tolerance = 1e-8;
};

struct Trajectory {
  std::vector<SystemState> states;
  std::vector<double> total_risks;
  std::vector<Vector> subpop_risks;
  // NaN where the learner was empty at that step.
  std::vector<Vector> learner_risks;
  std::vector<std::vector<bool>> empty_learners;
  ContractStats contracts;
  // First index of the stationary window, when the detector fired.
  std::optional<int> equilibrium_step;
  std::vector<std::string> events;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  const SystemState& final_state() const { return states.back(); }
};

/// One sequential update: the scheduled allocation rows move against the
/// current parameters, then the scheduled learners move against the new
/// allocations. Empty learners keep their parameters. Throws
/// MonotonicityViolation if total risk rises by more than the tolerance.
SystemState step(const SystemState& state, const Scenario& scenario,
                 ContractStats* stats = nullptr, const EngineOptions& options = {});

Trajectory simulate(const Scenario& scenario, const SystemState& initial_state,
                    int max_steps, const EquilibriumDetector& detector = {},
                    const EngineOptions& options = {});

std::optional<int> detect_equilibrium(const Trajectory& trajectory,
                                      const EquilibriumDetector& detector);

// Entrywise max-abs distance over allocations and parameters.
double state_distance(const SystemState& a, const SystemState& b);

// state_distance minimized over relabelings of b's learners: exhaustive for
// m <= 8, greedy matching above.
double state_distance_up_to_permutation(const SystemState& a,
                                        const SystemState& b);

enum class PerturbTarget { kThetaOnly, kAlphaOnly, kBoth };

// kClipped adds N(0, sigma) and clips at zero; kFolded adds |N(0, sigma)|, so
// every learner receives some mass in every row.
enum class AlphaNoise { kClipped, kFolded };

/// Seeded Gaussian perturbation. Perturbed allocation rows are renormalized.
/// A non-empty `learners` list restricts theta noise to those learners.
SystemState perturb(const SystemState& state, double sigma, std::uint64_t seed,
                    PerturbTarget target = PerturbTarget::kThetaOnly,
                    AlphaNoise alpha_noise = AlphaNoise::kClipped,
                    std::span<const int> learners = {});

struct ProbeOptions {
  PerturbTarget target = PerturbTarget::kBoth;
  AlphaNoise alpha_noise = AlphaNoise::kFolded;
  int max_steps = 20000;
  double return_tolerance = 1e-4;
  EquilibriumDetector detector;
};

/// Fraction of `trials` perturb-and-resimulate runs that come back to within
/// return_tolerance of eq_state, up to learner relabeling.
double empirical_stability_probe(const Scenario& scenario,
                                 const SystemState& eq_state, double sigma,
                                 int trials, std::uint64_t seed,
                                 const ProbeOptions& options = {});

// Final state of a simulation without recording the trajectory.
struct RunResult {
  SystemState final_state;
  bool converged = false;
  int steps = 0;
  std::vector<double> total_risks;
  ContractStats contracts;
};

RunResult run_to_equilibrium(const Scenario& scenario, const SystemState& initial,
                             int max_steps, const EquilibriumDetector& detector = {},
                             const EngineOptions& options = {});

}  // namespace popdyn
