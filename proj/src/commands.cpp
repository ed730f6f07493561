#include "popdyn/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <sstream>

#include "popdyn/csv.hpp"
#include "popdyn/equilibria.hpp"
#include "popdyn/error.hpp"
#include "popdyn/goldens.hpp"
#include "popdyn/random.hpp"
#include "popdyn/scenario_io.hpp"

namespace popdyn {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// JSON has no NaN or infinity; both become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(number(v[k]));
  return out;
}

json report_json(const EquilibriumReport& r) {
  json j = {{"classification", to_string(r.classification)},
            {"stability", to_string(r.stability)},
            {"total_risk", number(r.total_risk)},
            {"per_subpop_risks", vector_json(r.per_subpop_risks)},
            {"margin", number(r.margin)},
            {"notes", r.notes}};
  j["welfare_gap"] = r.welfare_gap ? number(*r.welfare_gap) : json(nullptr);
  j["assignment"] = r.assignment ? json(r.assignment->ToString()) : json(nullptr);
  return j;
}

json contracts_json(const ContractStats& c) {
  return {{"allocation_checks", c.allocation_checks},
          {"allocation_failures", c.allocation_failures},
          {"learner_checks", c.learner_checks},
          {"learner_failures", c.learner_failures},
          {"empty_learner_freezes", c.empty_learner_freezes}};
}

bool within_budget(const Scenario& s, double budget) {
  return std::pow(static_cast<double>(s.m()), s.n()) <= budget;
}

ScenarioFile load_with(const fs::path& path, const Overrides& o) {
  ScenarioFile f = load_scenario(path);
  if (o.seed) f.seed = *o.seed;
  if (o.max_steps) {
    if (*o.max_steps < 1) throw InvalidArgument("--max-steps must be >= 1");
    f.max_steps = *o.max_steps;
  }
  if (o.sigma) {
    if (!(*o.sigma >= 0.0)) throw InvalidArgument("--sigma must be >= 0");
    f.sigma = *o.sigma;
  }
  return f;
}

SystemState perturbed_start(const ScenarioFile& f) {
  return perturb(f.initial_state, f.sigma, derive_seed(f.seed, Stream::kPerturbation, 0));
}

std::string trajectory_csv(const Trajectory& traj, const Scenario& s) {
  CsvWriter w(trajectory_header(s.n(), s.m(), s.d()));
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const SystemState& st = traj.states[k];
    w.Cell(st.t).Cell(traj.total_risks[k]).Cells(traj.subpop_risks[k]).Cells(traj.learner_risks[k]);
    for (int i = 0; i < s.n(); ++i) w.Cells(st.alpha.row(i));
    for (int j = 0; j < s.m(); ++j) w.Cells(st.theta_of(j));
    w.EndRow();
  }
  return w.str();
}

}  // namespace

std::vector<std::string> trajectory_header(int n, int m, int d) {
  std::vector<std::string> h{"t", "total_risk"};
  for (int i = 1; i <= n; ++i) h.push_back("subpop_risk_" + std::to_string(i));
  for (int j = 1; j <= m; ++j) h.push_back("learner_risk_" + std::to_string(j));
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) h.push_back("alpha_" + std::to_string(i) + "_" + std::to_string(j));
  }
  for (int j = 1; j <= m; ++j) {
    for (int k = 1; k <= d; ++k) h.push_back("theta_" + std::to_string(j) + "_" + std::to_string(k));
  }
  return h;
}

std::vector<std::string> competition_header(int n) {
  std::vector<std::string> h{"phase",      "m",          "start_step",    "steps",
                             "converged",  "total_risk", "worst_subpop_risk",
                             "split_learner", "split_hypothesis"};
  for (int i = 1; i <= n; ++i) h.push_back("subpop_risk_" + std::to_string(i));
  return h;
}

std::string version_string() {
  return std::string("popdyn ") + kToolVersion + " (scenario schema " +
         std::to_string(kScenarioSchemaVersion) + ")";
}

int cmd_simulate(const fs::path& scenario, const fs::path& out_dir, const Overrides& overrides,
                 double budget, Streams io) {
  try {
    const ScenarioFile f = load_with(scenario, overrides);
    const Scenario& s = f.scenario;
    Trajectory traj;
    try {
      traj = simulate(s, perturbed_start(f), f.max_steps, f.detector);
    } catch (const MonotonicityViolation& e) {
      io.err << "error: " << e.what() << "\n";
      return kExitMonotonicity;
    }
    const bool converged = traj.equilibrium_step.has_value();
    const SystemState& last = traj.final_state();

    json summary = {{"converged", converged},
                    {"steps", traj.steps()},
                    {"seed", f.seed},
                    {"sigma", f.sigma},
                    {"final_total_risk", number(traj.total_risks.back())},
                    {"contracts", contracts_json(traj.contracts)}};
    summary["equilibrium_step"] = converged ? json(*traj.equilibrium_step) : json(nullptr);
    Eigen::Index worst = 0;
    const double worst_risk = traj.subpop_risks.back().maxCoeff(&worst);
    summary["worst_subpop"] = static_cast<int>(worst) + 1;
    summary["worst_subpop_risk"] = number(worst_risk);
    try {
      const EquilibriumReport rep = classify_state(last, s);
      summary["classification"] = to_string(rep.classification);
      summary["stability"] = to_string(rep.stability);
      summary["margin"] = number(rep.margin);
      summary["notes"] = rep.notes;
      if (rep.assignment) summary["assignment"] = rep.assignment->ToString();
    } catch (const InvalidArgument& e) {
      summary["classification"] = nullptr;
      summary["stability"] = nullptr;
      summary["margin"] = nullptr;
      summary["notes"] = json::array({std::string("not classified: ") + e.what()});
    }
    summary["welfare_gap"] = nullptr;
    summary["optimum_total_risk"] = nullptr;
    if (within_budget(s, budget)) {
      const auto reports = enumerate_split_equilibria(s, true, budget);
      summary["optimum_total_risk"] = number(reports.front().total_risk);
      summary["welfare_gap"] = number(traj.total_risks.back() - reports.front().total_risk);
    }

    std::ostringstream events;
    for (const auto& e : traj.events) events << e << "\n";
    if (!converged) events << "no equilibrium within " << traj.steps() << " steps\n";
    events << "contracts: " << contracts_json(traj.contracts).dump() << "\n";

    const std::string csv = trajectory_csv(traj, s);
    write_file_atomic(out_dir / "trajectory.csv", csv);
    write_file_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
    write_file_atomic(out_dir / "events.log", events.str());
    write_file_atomic(out_dir / "final_state.json", serialize_state(last));
    io.out << summary.dump(2) << "\n";
    return converged ? kExitOk : kExitNotConverged;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_classify(const fs::path& scenario, const fs::path& state, Streams io) {
  try {
    const ScenarioFile f = load_scenario(scenario);
    const SystemState st = parse_state(read_file(state), f.scenario, state.string());
    const EquilibriumReport rep = classify_state(st, f.scenario);
    io.out << report_json(rep).dump(2) << "\n";
    if (rep.classification == Classification::kNonEquilibrium) return kExitNonEquilibrium;
    return rep.stability == Stability::kUnstable ? kExitUnstable : kExitOk;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_enumerate(const fs::path& scenario, const fs::path& out_dir, bool dedupe, double budget,
                  Streams io) {
  try {
    const ScenarioFile f = load_scenario(scenario);
    std::vector<EquilibriumReport> reports;
    try {
      reports = enumerate_split_equilibria(f.scenario, dedupe, budget);
    } catch (const BudgetExceeded& e) {
      io.err << "error: " << e.what() << " (m^n = " << format_double(e.required())
             << ", budget " << format_double(budget) << ")\n";
      return kExitBudget;
    }
    CsvWriter w({"rank", "assignment", "total_risk", "welfare_gap", "classification", "stability",
                 "margin"});
    for (size_t k = 0; k < reports.size(); ++k) {
      const auto& r = reports[k];
      w.Cell(static_cast<long long>(k + 1))
          .Cell(r.assignment->ToString())
          .Cell(r.total_risk)
          .Cell(*r.welfare_gap)
          .Cell(to_string(r.classification))
          .Cell(to_string(r.stability))
          .Cell(r.margin);
      w.EndRow();
    }
    write_file_atomic(out_dir / "equilibria.csv", w.str());
    io.out << reports.size() << " assignments; optimum " << reports.front().assignment->ToString()
           << " total_risk " << format_double(reports.front().total_risk) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_competition(const fs::path& scenario, const fs::path& out_dir, int target_m,
                    const Overrides& overrides, SplitPolicy policy, Streams io) {
  try {
    const ScenarioFile f = load_with(scenario, overrides);
    CompetitionOptions opt;
    opt.target_m = target_m;
    opt.sigma = overrides.sigma.value_or(f.sigma > 0.0 ? f.sigma : 1e-3);
    opt.seed = f.seed;
    opt.max_steps_per_phase = f.max_steps;
    opt.detector = f.detector;
    opt.policy = policy;
    if (target_m <= f.scenario.m() || target_m > f.scenario.n()) {
      throw InvalidArgument("--target-m must be in (m, n] = (" + std::to_string(f.scenario.m()) +
                            ", " + std::to_string(f.scenario.n()) + "]");
    }
    std::optional<CompetitionResult> run;
    try {
      run = run_competition(f.scenario, f.initial_state, opt);
    } catch (const MonotonicityViolation& e) {
      io.err << "error: " << e.what() << "\n";
      return kExitMonotonicity;
    }
    const CompetitionResult& res = *run;
    if (!res.completed) {
      const auto& p = res.phases.back();
      io.err << "error: phase " << res.phases.size() - 1 << " (m=" << p.m
             << ") did not converge within " << p.steps << " steps\n";
      return kExitNotConverged;
    }
    CsvWriter w(competition_header(f.scenario.n()));
    for (size_t k = 0; k < res.phases.size(); ++k) {
      const auto& p = res.phases[k];
      w.Cell(static_cast<long long>(k))
          .Cell(p.m)
          .Cell(static_cast<long long>(p.start_step))
          .Cell(p.steps)
          .Cell(p.converged ? "true" : "false")
          .Cell(p.total_risk)
          .Cell(p.subpop_risks.maxCoeff());
      if (p.split) {
        w.Cell(*p.split + 1).Cell(p.split_hypothesis ? "true" : "false");
      } else {
        w.Cell("").Cell("");
      }
      w.Cells(p.subpop_risks);
      w.EndRow();
    }
    write_file_atomic(out_dir / "competition.csv", w.str());
    io.out << res.phases.size() << " phases; final total_risk "
           << format_double(res.phases.back().total_risk) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_goldens(const fs::path& out_dir, Streams io) {
  try {
    const auto rows = compute_goldens();
    CsvWriter w({"example", "parameter", "quantity", "computed", "expected", "abs_error", "tag",
                 "ok"});
    std::vector<const GoldenRow*> failures;
    for (const auto& r : rows) {
      w.Cell(r.example)
          .Cell(r.parameter)
          .Cell(r.quantity)
          .Cell(r.computed)
          .Cell(r.expected)
          .Cell(std::abs(r.computed - r.expected))
          .Cell(to_string(r.tag))
          .Cell(r.ok ? "true" : "false");
      w.EndRow();
      if (!r.ok) failures.push_back(&r);
    }
    write_file_atomic(out_dir / "goldens.csv", w.str());
    for (const GoldenRow* r : failures) {
      io.err << "mismatch: " << r->example << " " << r->parameter << " " << r->quantity
             << " computed " << format_double(r->computed) << " expected "
             << format_double(r->expected) << "\n";
    }
    io.out << rows.size() << " golden rows, " << failures.size() << " mismatches\n";
    return failures.empty() ? kExitOk : kExitGoldenMismatch;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_probe(const fs::path& scenario, const std::optional<fs::path>& state, double sigma,
              int trials, const Overrides& overrides, Streams io) {
  try {
    const ScenarioFile f = load_with(scenario, overrides);
    SystemState eq = f.initial_state;
    if (state) {
      eq = parse_state(read_file(*state), f.scenario, state->string());
    } else {
      const RunResult run = run_to_equilibrium(f.scenario, perturbed_start(f), f.max_steps, f.detector);
      if (!run.converged) {
        io.err << "error: no equilibrium within " << run.steps << " steps\n";
        return kExitNotConverged;
      }
      eq = run.final_state;
    }
    const double fraction = empirical_stability_probe(f.scenario, eq, sigma, trials,
                                                      derive_seed(f.seed, Stream::kProbe, 0));
    const json out = {{"sigma", sigma}, {"trials", trials}, {"returned_fraction", fraction}};
    io.out << out.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace popdyn
