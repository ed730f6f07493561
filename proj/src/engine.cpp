#include "popdyn/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "popdyn/error.hpp"
#include "popdyn/parallel.hpp"
#include "popdyn/random.hpp"
#include "popdyn/simplex.hpp"

namespace popdyn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Recorded {
  double total;
  Vector subpop;
  Vector learner;
  std::vector<bool> empty;
};

Recorded record(const SystemState& state, const Scenario& scenario) {
  const Matrix r = risk_matrix(state.theta, scenario);
  const Matrix& a = state.alpha.matrix();
  Recorded out;
  out.subpop = a.cwiseProduct(r).rowwise().sum();
  out.total = scenario.beta().dot(out.subpop);
  out.learner = Vector(scenario.m());
  out.empty.assign(scenario.m(), false);
  for (int j = 0; j < scenario.m(); ++j) {
    const Vector w = a.col(j).cwiseProduct(scenario.beta());
    const double mass = w.sum();
    if (mass < kEmptyLearnerMass) {
      out.learner[j] = kNaN;
      out.empty[j] = true;
    } else {
      out.learner[j] = w.dot(r.col(j)) / mass;
    }
  }
  return out;
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

void EquilibriumDetector::Validate() const {
  if (!(state_tolerance > 0.0)) {
    throw InvalidArgument("detector state_tolerance must be > 0");
  }
  if (window < 1) throw InvalidArgument("detector window must be >= 1");
}

ContractStats& ContractStats::operator+=(const ContractStats& other) {
  allocation_checks += other.allocation_checks;
  allocation_failures += other.allocation_failures;
  learner_checks += other.learner_checks;
  learner_failures += other.learner_failures;
  empty_learner_freezes += other.empty_learner_freezes;
  return *this;
}

SystemState step(const SystemState& state, const Scenario& scenario,
                 ContractStats* stats, const EngineOptions& options) {
  check_consistent(state, scenario);
  ContractStats local;
  ContractStats& s = stats ? *stats : local;

  const Matrix risks_before = risk_matrix(state.theta, scenario);
  const Matrix& a_old = state.alpha.matrix();
  const double before =
      scenario.beta().dot(a_old.cwiseProduct(risks_before).rowwise().sum());

  Matrix alpha = a_old;
  for (int i : scenario.schedule().SubpopsAt(state.t, scenario.n())) {
    const Vector row = a_old.row(i).transpose();
    const Vector r = risks_before.row(i).transpose();
    const Vector next = apply_allocation_rule(scenario.subpop_rule(), row, r);
    if (options.check_contracts) {
      ++s.allocation_checks;
      if (next.dot(r) > row.dot(r) + 1e-10) ++s.allocation_failures;
    }
    alpha.row(i) = next.transpose();
  }
  AllocationMatrix new_alpha(std::move(alpha));

  Matrix theta = state.theta;
  for (int j : scenario.schedule().LearnersAt(state.t, scenario.m())) {
    const Vector col = new_alpha.col(j);
    if (learner_mass(col, scenario.beta()) < kEmptyLearnerMass) {
      ++s.empty_learner_freezes;
      continue;
    }
    const Vector old_theta = state.theta_of(j);
    const Vector next =
        apply_learner_rule(scenario.learner_rule(), state.t, old_theta, col,
                           scenario.beta(), scenario.risks());
    if (options.check_contracts) {
      ++s.learner_checks;
      if (!verify_learner_risk_reducing(old_theta, next, col, scenario.beta(),
                                        scenario.risks())) {
        ++s.learner_failures;
      }
    }
    theta.row(j) = next.transpose();
  }

  SystemState out{std::move(new_alpha), std::move(theta), state.t + 1};
  const double after = total_risk(out, scenario);
  if (after > before + options.monotonicity_tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "total risk increased at step " << state.t << ": " << before
       << " -> " << after;
    throw MonotonicityViolation(state.t, before, after, os.str());
  }
  return out;
}

Trajectory simulate(const Scenario& scenario, const SystemState& initial_state,
                    int max_steps, const EquilibriumDetector& detector,
                    const EngineOptions& options) {
  if (max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  detector.Validate();
  check_consistent(initial_state, scenario);

  Trajectory traj;
  auto push = [&](SystemState st) {
    Recorded rec = record(st, scenario);
    for (int j = 0; j < scenario.m(); ++j) {
      const bool was_empty =
          !traj.empty_learners.empty() && traj.empty_learners.back()[j];
      if (rec.empty[j] && !was_empty) {
        traj.events.push_back("t=" + std::to_string(st.t) + " learner " +
                              std::to_string(j) + " empty; parameters frozen");
      }
    }
    traj.total_risks.push_back(rec.total);
    traj.subpop_risks.push_back(std::move(rec.subpop));
    traj.learner_risks.push_back(std::move(rec.learner));
    traj.empty_learners.push_back(std::move(rec.empty));
    traj.states.push_back(std::move(st));
  };

  push(initial_state);
  int quiet = 0;
  for (int k = 0; k < max_steps; ++k) {
    SystemState next = step(traj.states.back(), scenario, &traj.contracts, options);
    const double delta = state_distance(traj.states.back(), next);
    push(std::move(next));
    quiet = delta <= detector.state_tolerance ? quiet + 1 : 0;
    if (quiet >= detector.window) {
      traj.equilibrium_step = traj.steps() - detector.window;
      traj.events.push_back("t=" + std::to_string(traj.states.back().t) +
                            " equilibrium detected from step " +
                            std::to_string(*traj.equilibrium_step));
      break;
    }
  }
  return traj;
}

RunResult run_to_equilibrium(const Scenario& scenario, const SystemState& initial,
                             int max_steps, const EquilibriumDetector& detector,
                             const EngineOptions& options) {
  if (max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  detector.Validate();
  RunResult out{initial, false, 0, {}, {}};
  out.total_risks.push_back(total_risk(initial, scenario));
  int quiet = 0;
  for (int k = 0; k < max_steps; ++k) {
    SystemState next = step(out.final_state, scenario, &out.contracts, options);
    const double delta = state_distance(out.final_state, next);
    out.final_state = std::move(next);
    out.total_risks.push_back(total_risk(out.final_state, scenario));
    ++out.steps;
    quiet = delta <= detector.state_tolerance ? quiet + 1 : 0;
    if (quiet >= detector.window) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::optional<int> detect_equilibrium(const Trajectory& trajectory,
                                      const EquilibriumDetector& detector) {
  detector.Validate();
  const auto& s = trajectory.states;
  int run = 0;
  for (size_t k = 1; k < s.size(); ++k) {
    run = state_distance(s[k - 1], s[k]) <= detector.state_tolerance ? run + 1 : 0;
    if (run >= detector.window) return static_cast<int>(k) - detector.window;
  }
  return std::nullopt;
}

double state_distance(const SystemState& a, const SystemState& b) {
  if (a.alpha.rows() != b.alpha.rows() || a.alpha.cols() != b.alpha.cols() ||
      a.theta.rows() != b.theta.rows() || a.theta.cols() != b.theta.cols()) {
    throw InvalidArgument("states have different shapes");
  }
  return std::max(max_abs(a.alpha.matrix() - b.alpha.matrix()),
                  max_abs(a.theta - b.theta));
}

double state_distance_up_to_permutation(const SystemState& a,
                                        const SystemState& b) {
  const int m = a.alpha.cols();
  if (b.alpha.cols() != m) throw InvalidArgument("states have different m");
  auto dist_for = [&](const std::vector<int>& perm) {
    double worst = 0.0;
    for (int j = 0; j < m; ++j) {
      worst = std::max(worst, max_abs(a.alpha.matrix().col(j) -
                                      b.alpha.matrix().col(perm[j])));
      worst = std::max(worst, max_abs(a.theta.row(j) - b.theta.row(perm[j])));
    }
    return worst;
  };
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  if (m <= 8) {
    double best = std::numeric_limits<double>::infinity();
    do {
      best = std::min(best, dist_for(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  // Greedy: match each of a's learners to the closest unused learner of b.
  std::vector<bool> used(m, false);
  for (int j = 0; j < m; ++j) {
    int pick = -1;
    double pick_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
      if (used[k]) continue;
      const double dk =
          std::max(max_abs(a.alpha.matrix().col(j) - b.alpha.matrix().col(k)),
                   max_abs(a.theta.row(j) - b.theta.row(k)));
      if (dk < pick_d) {
        pick_d = dk;
        pick = k;
      }
    }
    used[pick] = true;
    perm[j] = pick;
  }
  return dist_for(perm);
}

SystemState perturb(const SystemState& state, double sigma, std::uint64_t seed,
                    PerturbTarget target, AlphaNoise alpha_noise,
                    std::span<const int> learners) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (sigma == 0.0) return state;

  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  Matrix theta = state.theta;
  Matrix alpha = state.alpha.matrix();

  if (target != PerturbTarget::kAlphaOnly) {
    std::vector<int> which(learners.begin(), learners.end());
    if (which.empty()) {
      which.resize(theta.rows());
      std::iota(which.begin(), which.end(), 0);
    }
    for (int j : which) {
      if (j < 0 || j >= theta.rows()) {
        throw InvalidArgument("perturbed learner index out of range");
      }
      for (Eigen::Index k = 0; k < theta.cols(); ++k) theta(j, k) += noise(rng);
    }
  }
  if (target != PerturbTarget::kThetaOnly) {
    for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
      for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
        const double z = noise(rng);
        alpha(i, j) += alpha_noise == AlphaNoise::kFolded ? std::abs(z) : z;
      }
      alpha.row(i) = renormalize(alpha.row(i).transpose()).transpose();
    }
  }
  return SystemState{AllocationMatrix(std::move(alpha)), std::move(theta), state.t};
}

double empirical_stability_probe(const Scenario& scenario,
                                 const SystemState& eq_state, double sigma,
                                 int trials, std::uint64_t seed,
                                 const ProbeOptions& options) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  check_consistent(eq_state, scenario);
  std::vector<int> returned(trials, 0);
  parallel_for(trials, [&](int k) {
    const SystemState start =
        perturb(eq_state, sigma, derive_seed(seed, Stream::kProbe, k),
                options.target, options.alpha_noise);
    const RunResult run =
        run_to_equilibrium(scenario, start, options.max_steps, options.detector);
    returned[k] = state_distance_up_to_permutation(eq_state, run.final_state) <=
                  options.return_tolerance;
  });
  return static_cast<double>(std::accumulate(returned.begin(), returned.end(), 0)) /
         trials;
}

}  // namespace popdyn
