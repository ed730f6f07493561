#include "popdyn/schedule.hpp"

#include <numeric>
#include <set>
#include <string>

#include "popdyn/error.hpp"

namespace popdyn {
namespace {

void check_order(const std::vector<int>& order, int limit, const char* what) {
  std::set<int> seen;
  for (int k : order) {
    if (k < 0 || k >= limit) {
      throw InvalidArgument(std::string(what) + " index " + std::to_string(k) +
                            " out of range");
    }
    if (!seen.insert(k).second) {
      throw InvalidArgument(std::string(what) + " index " + std::to_string(k) +
                            " listed twice");
    }
  }
}

std::vector<int> all_indices(int count) {
  std::vector<int> v(count);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<int> order_or_all(const std::vector<int>& order, int count) {
  return order.empty() ? all_indices(count) : order;
}

}  // namespace

void UpdateSchedule::Validate(int n, int m) const {
  check_order(subpop_order, n, "subpopulation");
  check_order(learner_order, m, "learner");
}

std::vector<int> UpdateSchedule::SubpopsAt(int t, int n) const {
  switch (kind) {
    case ScheduleKind::kRoundRobinSubpops: {
      const auto order = order_or_all(subpop_order, n);
      return {order[static_cast<size_t>(t) % order.size()]};
    }
    case ScheduleKind::kCustomOrder:
      return order_or_all(subpop_order, n);
    default:
      return all_indices(n);
  }
}

std::vector<int> UpdateSchedule::LearnersAt(int t, int m) const {
  switch (kind) {
    case ScheduleKind::kRoundRobinLearners: {
      const auto order = order_or_all(learner_order, m);
      return {order[static_cast<size_t>(t) % order.size()]};
    }
    case ScheduleKind::kCustomOrder:
      return order_or_all(learner_order, m);
    default:
      return all_indices(m);
  }
}

}  // namespace popdyn
