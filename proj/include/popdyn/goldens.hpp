#pragma once

#include <string>
#include <vector>

namespace popdyn {

// kClosedForm rows compare against a known closed form; kOracle rows use
// an independent oracle; kReported rows are informational and never fail.
enum class GoldenTag { kClosedForm, kOracle, kReported };

const char* to_string(GoldenTag tag);

struct GoldenRow {
  std::string example;
  std::string parameter;  // e.g. "beta=0.35"
  std::string quantity;
  double computed = 0.0;
  double expected = 0.0;  // NaN when the row is a boolean check
  GoldenTag tag = GoldenTag::kOracle;
  bool ok = true;
};

inline constexpr double kGoldenTolerance = 1e-9;

/// Minority example, two-learner gap example, and the three-population
/// stability predicate sweep.
std::vector<GoldenRow> compute_goldens();

std::vector<GoldenRow> minority_goldens();
std::vector<GoldenRow> welfare_gap_goldens(double eps = 0.01);
std::vector<GoldenRow> predicate_goldens();

}  // namespace popdyn
