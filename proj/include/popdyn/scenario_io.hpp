#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "popdyn/engine.hpp"
#include "popdyn/error.hpp"
#include "popdyn/model.hpp"

namespace popdyn {

inline constexpr int kScenarioSchemaVersion = 1;

// Diagnostic carries "<source>:<line>:<col>" for syntax errors and the JSON
// pointer of the offending field otherwise.
class ParseError : public InvalidArgument {
 public:
  ParseError(std::string location, const std::string& message)
      : InvalidArgument(location + ": " + message), location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

/// A scenario file with every random choice already resolved.
struct ScenarioFile {
  std::string name;
  Scenario scenario;
  SystemState initial_state;
  EquilibriumDetector detector;
  std::uint64_t seed = 0;
  int max_steps = 10000;
  // Seeded theta perturbation applied by `simulate` before the run.
  double sigma = 0.0;
};

ScenarioFile parse_scenario(std::string_view text, const std::string& source = "<scenario>");
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Canonical JSON text; initial allocations and parameters are written out
/// explicitly so parsing the result reproduces the same ScenarioFile.
/// Throws InvalidArgument for custom (non-quadratic) risks.
std::string serialize_scenario(const ScenarioFile& file);

// {"alpha": [[...]], "theta": [[...]], "t": k}
std::string serialize_state(const SystemState& state);
SystemState parse_state(std::string_view text, const Scenario& scenario,
                        const std::string& source = "<state>");

}  // namespace popdyn
