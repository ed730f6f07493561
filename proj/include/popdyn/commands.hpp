#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "popdyn/competition.hpp"
#include "popdyn/engine.hpp"

namespace popdyn {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitNotConverged = 2,
  kExitMonotonicity = 3,
  kExitUnstable = 4,
  kExitNonEquilibrium = 5,
  kExitBudget = 6,
  kExitGoldenMismatch = 7,
};

// Command-line values that take precedence over the scenario file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_steps;
  std::optional<double> sigma;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

/// Header of trajectory.csv for the given sizes.
std::vector<std::string> trajectory_header(int n, int m, int d);
std::vector<std::string> competition_header(int n);

int cmd_simulate(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                 const Overrides& overrides, double budget, Streams io);

int cmd_classify(const std::filesystem::path& scenario, const std::filesystem::path& state,
                 Streams io);

int cmd_enumerate(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                  bool dedupe, double budget, Streams io);

int cmd_competition(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                    int target_m, const Overrides& overrides, SplitPolicy policy, Streams io);

int cmd_goldens(const std::filesystem::path& out_dir, Streams io);

// Without a state file the scenario is first simulated to equilibrium.
int cmd_probe(const std::filesystem::path& scenario, const std::optional<std::filesystem::path>& state,
              double sigma, int trials, const Overrides& overrides, Streams io);

std::string version_string();

}  // namespace popdyn
