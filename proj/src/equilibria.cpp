#include "popdyn/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "popdyn/error.hpp"
#include "popdyn/hull.hpp"
#include "popdyn/parallel.hpp"

namespace popdyn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

bool SplitAssignment::covers(int m) const {
  std::vector<bool> seen(m, false);
  for (int j : gamma_map) {
    if (j >= 0 && j < m) seen[j] = true;
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

SplitAssignment SplitAssignment::canonical() const {
  std::map<int, int> relabel;
  SplitAssignment out;
  out.gamma_map.reserve(gamma_map.size());
  for (int j : gamma_map) {
    auto [it, inserted] = relabel.try_emplace(j, static_cast<int>(relabel.size()));
    out.gamma_map.push_back(it->second);
  }
  return out;
}

std::string SplitAssignment::ToString() const {
  int m = 0;
  for (int j : gamma_map) m = std::max(m, j + 1);
  std::string out;
  for (int j = 0; j < m; ++j) {
    if (j > 0) out += "/";
    out += "{";
    bool first = true;
    for (size_t i = 0; i < gamma_map.size(); ++i) {
      if (gamma_map[i] != j) continue;
      if (!first) out += ",";
      out += std::to_string(i + 1);
      first = false;
    }
    out += "}";
  }
  return out;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::kSplitMarket: return "split_market";
    case Classification::kBalancedCandidate: return "balanced_candidate";
    case Classification::kNonEquilibrium: return "non_equilibrium";
  }
  return "?";
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::kAsymptoticallyStable: return "asymptotically_stable";
    case Stability::kUnstable: return "unstable";
    case Stability::kPossiblyStableNotAsymptotic:
      return "possibly_stable_not_asymptotic";
  }
  return "?";
}

Matrix optimal_theta(const Matrix& alpha, const Vector& beta,
                     std::span<const RiskFunction> risks, const Matrix* fallback) {
  if (alpha.rows() != beta.size() || risks.size() != static_cast<size_t>(beta.size())) {
    throw InvalidArgument("allocation, beta and risks disagree on n");
  }
  const int d = risks.front().dim();
  Matrix theta = Matrix::Zero(alpha.cols(), d);
  for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
    const Vector col = alpha.col(j);
    if (learner_mass(col, beta) < kEmptyLearnerMass) {
      if (fallback) theta.row(j) = fallback->row(j);
      continue;
    }
    theta.row(j) = full_minimize(col, beta, risks).transpose();
  }
  return theta;
}

double potential_value(const Matrix& alpha, const Vector& beta,
                       std::span<const RiskFunction> risks) {
  const Matrix theta = optimal_theta(alpha, beta, risks);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
    const Vector col = alpha.col(j);
    if (learner_mass(col, beta) < kEmptyLearnerMass) continue;
    const Vector tj = theta.row(j).transpose();
    for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
      if (alpha(i, j) != 0.0) acc += beta[i] * alpha(i, j) * risks[i].Value(tj);
    }
  }
  return acc;
}

double potential_value(const AllocationMatrix& alpha, const Scenario& scenario) {
  return potential_value(alpha.matrix(), scenario.beta(), scenario.risks());
}

Matrix potential_gradient(const Matrix& alpha, const Vector& beta,
                          std::span<const RiskFunction> risks) {
  for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
    if (learner_mass(alpha.col(j), beta) < kEmptyLearnerMass) {
      throw EmptyLearner(static_cast<int>(j), "potential gradient undefined: learner " +
                                                  std::to_string(j) + " is empty");
    }
  }
  const Matrix theta = optimal_theta(alpha, beta, risks);
  Matrix grad(alpha.rows(), alpha.cols());
  for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
    const Vector tj = theta.row(j).transpose();
    for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
      grad(i, j) = beta[i] * risks[i].Value(tj);
    }
  }
  return grad;
}

Matrix potential_gradient(const AllocationMatrix& alpha, const Scenario& scenario) {
  return potential_gradient(alpha.matrix(), scenario.beta(), scenario.risks());
}

EquilibriumReport classify_state(const SystemState& state, const Scenario& scenario,
                                 const ClassifyOptions& options) {
  check_consistent(state, scenario);
  const int n = scenario.n();
  const int m = scenario.m();
  const Matrix& a = state.alpha.matrix();
  const Matrix r = risk_matrix(state.theta, scenario);

  std::vector<bool> empty(m);
  {
    std::ostringstream bad;
    bool any_bad = false;
    for (int j = 0; j < m; ++j) {
      empty[j] = learner_mass(a.col(j), scenario.beta()) < kEmptyLearnerMass;
      if (empty[j]) continue;
      const double g = learner_risk_gradient(a.col(j), scenario.beta(),
                                             scenario.risks(), state.theta_of(j))
                           .norm();
      bad << (any_bad ? ", " : "") << "learner " << j << ": " << g;
      if (g > options.optimality_tol) any_bad = true;
    }
    if (any_bad) {
      throw InvalidArgument(
          "learner parameters do not minimize the total risk; gradient norms " +
          bad.str());
    }
  }

  EquilibriumReport rep;
  rep.theta = state.theta;
  rep.per_subpop_risks = a.cwiseProduct(r).rowwise().sum();
  rep.total_risk = scenario.beta().dot(rep.per_subpop_risks);
  rep.margin = std::numeric_limits<double>::quiet_NaN();

  const double tol = options.zero_tol;
  bool binary = true;
  for (int i = 0; i < n && binary; ++i) {
    for (int j = 0; j < m; ++j) {
      const double v = a(i, j);
      if (std::abs(v) > tol && std::abs(v - 1.0) > tol) {
        binary = false;
        break;
      }
    }
  }

  if (binary) {
    SplitAssignment assignment;
    for (int i = 0; i < n; ++i) {
      Eigen::Index j;
      a.row(i).maxCoeff(&j);
      assignment.gamma_map.push_back(static_cast<int>(j));
    }
    rep.classification = Classification::kSplitMarket;
    double margin = kInf;
    for (int i = 0; i < n; ++i) {
      const int g = assignment.gamma_map[i];
      for (int j = 0; j < m; ++j) {
        if (j == g || empty[j]) continue;
        margin = std::min(margin, r(i, j) - r(i, g));
      }
    }
    rep.margin = margin;
    const bool covered = assignment.covers(m);
    if (!covered) {
      for (int j = 0; j < m; ++j) {
        if (std::find(assignment.gamma_map.begin(), assignment.gamma_map.end(), j) ==
            assignment.gamma_map.end()) {
          rep.notes.push_back("learner " + std::to_string(j) +
                              " serves no subpopulation");
        }
      }
    }
    if (covered && margin > options.strict_margin) {
      rep.stability = Stability::kAsymptoticallyStable;
    } else {
      rep.stability = Stability::kUnstable;
      if (covered) {
        rep.notes.push_back("some subpopulation weakly prefers another learner (margin " +
                            fmt(margin) + ")");
      }
    }
    rep.assignment = std::move(assignment);
    return rep;
  }

  bool equivalent = true;
  bool optimal = true;
  for (int i = 0; i < n; ++i) {
    std::vector<int> support;
    for (int j = 0; j < m; ++j) {
      if (a(i, j) > tol) support.push_back(j);
    }
    if (support.size() < 2) continue;
    double lo = kInf, hi = -kInf;
    for (int j : support) {
      lo = std::min(lo, r(i, j));
      hi = std::max(hi, r(i, j));
    }
    if (hi - lo > tol) {
      equivalent = false;
      rep.notes.push_back("subpopulation " + std::to_string(i) +
                          " is not risk-equivalent across its learners (spread " +
                          fmt(hi - lo) + ")");
    }
    for (int j : support) {
      const double g = scenario.risk(i).Gradient(state.theta_of(j)).norm();
      if (g > tol) {
        optimal = false;
        rep.notes.push_back("optimality condition fails: |grad R_" +
                            std::to_string(i) + "(theta_" + std::to_string(j) +
                            ")| = " + fmt(g));
      }
    }
  }

  if (!equivalent) {
    rep.classification = Classification::kNonEquilibrium;
    rep.stability = Stability::kUnstable;
  } else {
    rep.classification = Classification::kBalancedCandidate;
    rep.stability = optimal ? Stability::kPossiblyStableNotAsymptotic
                            : Stability::kUnstable;
  }
  return rep;
}

double three_pop_stability_slack(const Vector& phi1, const Vector& phi2, const Vector& phi3,
                        double beta2, double beta3) {
  const double lhs = (phi2 - phi3).norm();
  const double rhs = (beta2 + beta3) *
                     std::min((phi2 - phi1).norm() / beta3, (phi3 - phi1).norm() / beta2);
  return rhs - lhs;
}

bool three_pop_stability_predicate(const Vector& phi1, const Vector& phi2,
                                    const Vector& phi3, double beta2, double beta3) {
  return three_pop_stability_slack(phi1, phi2, phi3, beta2, beta3) > 0.0;
}

bool convex_hulls_disjoint(const SplitAssignment& partition,
                           std::span<const Vector> centers) {
  if (partition.gamma_map.size() != centers.size()) {
    throw InvalidArgument("partition and centers disagree on n");
  }
  int m = 0;
  for (int j : partition.gamma_map) m = std::max(m, j + 1);
  std::vector<std::vector<Vector>> groups(m);
  for (size_t i = 0; i < centers.size(); ++i) {
    groups[partition.gamma_map[i]].push_back(centers[i]);
  }
  for (int x = 0; x < m; ++x) {
    for (int y = x + 1; y < m; ++y) {
      if (groups[x].empty() || groups[y].empty()) continue;
      if (convex_hulls_intersect(groups[x], groups[y])) return false;
    }
  }
  return true;
}

bool convex_hulls_disjoint(const SplitAssignment& partition,
                           const Scenario& scenario) {
  std::vector<Vector> centers;
  for (const auto& r : scenario.risks()) centers.push_back(r.center());
  return convex_hulls_disjoint(partition, centers);
}

SystemState state_for_assignment(const SplitAssignment& assignment,
                                 const Scenario& scenario) {
  if (static_cast<int>(assignment.gamma_map.size()) != scenario.n()) {
    throw InvalidArgument("assignment length differs from n");
  }
  AllocationMatrix alpha = AllocationMatrix::FromAssignment(assignment.gamma_map,
                                                            scenario.m());
  Matrix theta = optimal_theta(alpha.matrix(), scenario.beta(), scenario.risks());
  return SystemState{std::move(alpha), std::move(theta), 0};
}

std::vector<EquilibriumReport> enumerate_split_equilibria(
    const Scenario& scenario, bool dedupe, double budget,
    const ClassifyOptions& options) {
  const int n = scenario.n();
  const int m = scenario.m();
  const double required = std::pow(static_cast<double>(m), n);
  if (required > budget) {
    std::ostringstream os;
    os.precision(17);
    os << "enumeration needs m^n = " << required << " assignments, budget is "
       << budget;
    throw BudgetExceeded(required, os.str());
  }

  // Odometer over [m]^n, keeping surjective (and optionally canonical) maps.
  std::vector<SplitAssignment> assignments;
  std::vector<int> digits(n, 0);
  std::vector<int> counts(m, 0);
  counts[0] = n;
  while (true) {
    bool surjective = std::all_of(counts.begin(), counts.end(),
                                  [](int c) { return c > 0; });
    if (surjective) {
      bool keep = true;
      if (dedupe) {
        int next_label = 0;
        for (int v : digits) {
          if (v > next_label) {
            keep = false;
            break;
          }
          if (v == next_label) ++next_label;
        }
      }
      if (keep) assignments.push_back(SplitAssignment{digits});
    }
    int pos = n - 1;
    while (pos >= 0) {
      --counts[digits[pos]];
      if (++digits[pos] < m) {
        ++counts[digits[pos]];
        break;
      }
      digits[pos] = 0;
      ++counts[0];
      --pos;
    }
    if (pos < 0) break;
  }

  std::vector<EquilibriumReport> reports(assignments.size());
  parallel_for(static_cast<int>(assignments.size()), [&](int k) {
    const SystemState st = state_for_assignment(assignments[k], scenario);
    reports[k] = classify_state(st, scenario, options);
    reports[k].assignment = assignments[k];
  });
  std::stable_sort(reports.begin(), reports.end(),
                   [](const EquilibriumReport& x, const EquilibriumReport& y) {
                     return x.total_risk < y.total_risk;
                   });
  if (!reports.empty()) {
    const double best = reports.front().total_risk;
    for (auto& rep : reports) rep.welfare_gap = rep.total_risk - best;
  }
  return reports;
}

double welfare_gap(const std::vector<EquilibriumReport>& reports,
                   double fixed_point_total_risk) {
  if (reports.empty()) throw InvalidArgument("no enumerated equilibria");
  double best = kInf;
  for (const auto& r : reports) best = std::min(best, r.total_risk);
  const double gap = fixed_point_total_risk - best;
  if (gap < -1e-8) {
    std::ostringstream os;
    os.precision(17);
    os << "fixed point total risk " << fixed_point_total_risk
       << " is below the enumerated optimum " << best;
    throw InvalidState(os.str());
  }
  return gap;
}

std::pair<SystemState, Scenario> split_learner(const SystemState& state,
                                               const Scenario& scenario, int j) {
  check_consistent(state, scenario);
  const int m = scenario.m();
  if (j < 0 || j >= m) throw InvalidArgument("learner index out of range");
  if (m >= scenario.n()) {
    throw CannotSplit("cannot split: already one learner per subpopulation");
  }
  Matrix alpha(scenario.n(), m + 1);
  alpha.leftCols(m) = state.alpha.matrix();
  alpha.col(j) *= 0.5;
  alpha.col(m) = alpha.col(j);
  Matrix theta(m + 1, scenario.d());
  theta.topRows(m) = state.theta;
  theta.row(m) = state.theta.row(j);
  Scenario next = scenario.WithLearners(m + 1);
  return {SystemState{AllocationMatrix(std::move(alpha)), std::move(theta), state.t},
          std::move(next)};
}

}  // namespace popdyn
