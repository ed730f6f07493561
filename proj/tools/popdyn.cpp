#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "popdyn/commands.hpp"

int main(int argc, char** argv) {
  using namespace popdyn;
  CLI::App app{"Simulate and analyze learners competing for subpopulations"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print tool and scenario schema versions");

  std::string scenario, out = ".", state;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_steps, target_m;
  std::optional<double> sigma;
  double budget = 2e7;
  bool dedupe = true;
  int trials = 20;
  std::string policy = "largest_non_optimal";

  auto common = [&](CLI::App* sub, bool with_sigma) {
    sub->add_option("scenario", scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the scenario seed");
    sub->add_option("--max-steps", max_steps, "Override the step limit");
    if (with_sigma) sub->add_option("--sigma", sigma, "Perturbation scale");
  };

  auto* sim = app.add_subcommand("simulate", "Run the dynamics and export the trajectory");
  common(sim, true);
  sim->add_option("--out", out, "Output directory");
  sim->add_option("--budget", budget, "Largest m^n for the welfare-gap oracle");

  auto* cls = app.add_subcommand("classify", "Classify a stored state");
  cls->add_option("scenario", scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  cls->add_option("state", state, "State file with alpha and theta")->required()->check(CLI::ExistingFile);

  auto* en = app.add_subcommand("enumerate", "Enumerate split-market assignments");
  en->add_option("scenario", scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  en->add_option("--out", out, "Output directory");
  en->add_flag("--dedupe,!--no-dedupe", dedupe, "Merge learner relabelings (default on)");
  en->add_option("--budget", budget, "Largest m^n to enumerate");

  auto* comp = app.add_subcommand("competition", "Repeated learner splitting");
  common(comp, true);
  comp->add_option("--target-m", target_m, "Final number of learners")->required();
  comp->add_option("--out", out, "Output directory");
  comp->add_option("--split-policy", policy, "largest_non_optimal or largest_mass")
      ->check(CLI::IsMember({"largest_non_optimal", "largest_mass"}));

  auto* gold = app.add_subcommand("goldens", "Check closed-form examples");
  gold->add_option("--out", out, "Output directory");

  auto* probe = app.add_subcommand("probe", "Empirical stability of an equilibrium");
  common(probe, true);
  probe->add_option("--state", state, "Equilibrium state (default: simulate first)");
  probe->add_option("--trials", trials, "Number of perturbed runs")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  Streams io{std::cout, std::cerr};
  if (show_version) {
    std::cout << version_string() << "\n";
    return kExitOk;
  }
  const Overrides ov{seed, max_steps, sigma};
  if (*sim) return cmd_simulate(scenario, out, ov, budget, io);
  if (*cls) return cmd_classify(scenario, state, io);
  if (*en) return cmd_enumerate(scenario, out, dedupe, budget, io);
  if (*comp) {
    return cmd_competition(scenario, out, *target_m, ov,
                           policy == "largest_mass" ? SplitPolicy::kLargestMass
                                                    : SplitPolicy::kLargestNonOptimal,
                           io);
  }
  if (*gold) return cmd_goldens(out, io);
  if (*probe) {
    return cmd_probe(scenario, state.empty() ? std::nullopt : std::optional<std::filesystem::path>(state),
                     sigma.value_or(1e-4), trials, ov, io);
  }
  std::cerr << app.help();
  return kExitError;
}
