#pragma once

#include <vector>

namespace popdyn {

enum class ScheduleKind {
  kAllSequential,       // every subpopulation, then every learner
  kRoundRobinSubpops,   // one subpopulation per step, every learner
  kRoundRobinLearners,  // every subpopulation, one learner per step
  kCustomOrder,         // the listed subpopulations, then the listed learners
};

/// Which agents update in each step. Allocations always update before
/// learner parameters. Empty orders mean "all indices, ascending".
struct UpdateSchedule {
  ScheduleKind kind = ScheduleKind::kAllSequential;
  std::vector<int> subpop_order;
  std::vector<int> learner_order;

  void Validate(int n, int m) const;

  // Indices updated at time t.
  std::vector<int> SubpopsAt(int t, int n) const;
  std::vector<int> LearnersAt(int t, int m) const;
};

}  // namespace popdyn
