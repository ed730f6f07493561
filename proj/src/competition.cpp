#include "popdyn/competition.hpp"

#include "popdyn/equilibria.hpp"
#include "popdyn/error.hpp"
#include "popdyn/random.hpp"

namespace popdyn {

bool has_non_optimal_subpop(const SystemState& state, const Scenario& scenario, int j,
                            double zero_tol, double gradient_tol) {
  const Vector th = state.theta_of(j);
  for (int i = 0; i < scenario.n(); ++i) {
    if (state.alpha(i, j) > zero_tol && scenario.risk(i).Gradient(th).norm() > gradient_tol) {
      return true;
    }
  }
  return false;
}

int choose_split_learner(const SystemState& state, const Scenario& scenario, SplitPolicy policy,
                         double zero_tol, double gradient_tol) {
  int best = -1, best_any = 0;
  double best_mass = -1.0, best_any_mass = -1.0;
  for (int j = 0; j < scenario.m(); ++j) {
    const double mass = learner_mass(state.alpha.col(j), scenario.beta());
    if (mass > best_any_mass) {
      best_any_mass = mass;
      best_any = j;
    }
    if (policy == SplitPolicy::kLargestNonOptimal && mass > best_mass &&
        has_non_optimal_subpop(state, scenario, j, zero_tol, gradient_tol)) {
      best_mass = mass;
      best = j;
    }
  }
  return best >= 0 ? best : best_any;
}

CompetitionResult run_competition(const Scenario& scenario, const SystemState& initial,
                                  const CompetitionOptions& options) {
  if (options.target_m < scenario.m() || options.target_m > scenario.n()) {
    throw InvalidArgument("target m must be in [m, n]");
  }
  if (!(options.sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");

  CompetitionResult result{{}, initial, false};
  Scenario current = scenario;
  SystemState state = initial;
  long clock = 0;
  for (int phase = 0;; ++phase) {
    const RunResult run =
        run_to_equilibrium(current, state, options.max_steps_per_phase, options.detector);
    CompetitionPhase p;
    p.m = current.m();
    p.start_step = clock;
    p.steps = run.steps;
    p.converged = run.converged;
    p.total_risk = total_risk(run.final_state, current);
    p.subpop_risks = run.final_state.alpha.matrix()
                         .cwiseProduct(risk_matrix(run.final_state.theta, current))
                         .rowwise()
                         .sum();
    clock += run.steps;
    state = run.final_state;
    if (!run.converged || current.m() == options.target_m) {
      result.phases.push_back(std::move(p));
      result.final_state = state;
      result.completed = run.converged;
      return result;
    }

    const int j = choose_split_learner(state, current, options.policy, options.zero_tol,
                                       options.gradient_tol);
    p.split = j;
    p.split_hypothesis =
        has_non_optimal_subpop(state, current, j, options.zero_tol, options.gradient_tol);
    result.phases.push_back(std::move(p));

    auto [split_state, split_scenario] = split_learner(state, current, j);
    const std::vector<int> copies{j, split_scenario.m() - 1};
    state = perturb(split_state, options.sigma,
                    derive_seed(options.seed, Stream::kPerturbation, static_cast<std::uint64_t>(phase)),
                    PerturbTarget::kThetaOnly, AlphaNoise::kClipped, copies);
    state.t = 0;
    current = std::move(split_scenario);
  }
}

}  // namespace popdyn
