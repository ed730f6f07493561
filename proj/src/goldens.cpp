#include "popdyn/goldens.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "popdyn/equilibria.hpp"
#include "popdyn/learner_rules.hpp"

namespace popdyn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string param(const char* name, double v) {
  std::ostringstream os;
  os << name << "=" << v;
  return os.str();
}

GoldenRow closed_form(std::string example, std::string parameter, std::string quantity,
                      double computed, double expected, GoldenTag tag) {
  const bool ok = tag == GoldenTag::kReported ||
                  std::abs(computed - expected) <= kGoldenTolerance;
  return {std::move(example), std::move(parameter), std::move(quantity), computed, expected, tag,
          ok};
}

GoldenRow check(std::string example, std::string parameter, std::string quantity, bool passed) {
  return {std::move(example), std::move(parameter), std::move(quantity), passed ? 1.0 : 0.0,
          kNaN, GoldenTag::kOracle, passed};
}

Vector scalar(double x) { return Vector::Constant(1, x); }

}  // namespace

const char* to_string(GoldenTag tag) {
  switch (tag) {
    case GoldenTag::kClosedForm:
      return "closed_form";
    case GoldenTag::kOracle:
      return "oracle";
    case GoldenTag::kReported:
      return "reported";
  }
  return "?";
}

std::vector<GoldenRow> minority_goldens() {
  const double phi = 10.0;
  std::vector<GoldenRow> rows;
  for (int k = 1; k <= 19; ++k) {
    const double b = 0.05 * k;
    const std::vector<RiskFunction> risks{RiskFunction::Isotropic(scalar(0.0)),
                                          RiskFunction::Isotropic(scalar(phi))};
    Vector beta(2);
    beta << b, 1.0 - b;
    const Vector theta = full_minimize(Vector::Ones(2), beta, risks);
    const double total = b * risks[0].Value(theta) + (1.0 - b) * risks[1].Value(theta);
    const std::string p = param("beta", b);
    rows.push_back(closed_form("minority", p, "theta", theta[0], (1 - b) * phi, GoldenTag::kClosedForm));
    rows.push_back(
        closed_form("minority", p, "total_risk", total, b * (1 - b) * phi * phi, GoldenTag::kClosedForm));
    rows.push_back(closed_form("minority", p, "minority_risk", risks[1].Value(theta),
                               b * b * phi * phi, GoldenTag::kClosedForm));
  }
  return rows;
}

std::vector<GoldenRow> welfare_gap_goldens(double eps) {
  std::vector<GoldenRow> rows;
  double previous_gap = -1.0;
  bool increasing = true;
  for (int k = 30; k <= 49; ++k) {
    const double b = 0.01 * k;
    const double phi = (1 - b) / (1 - 2 * b) - eps;
    std::vector<RiskFunction> risks{RiskFunction::Isotropic(scalar(0.0)),
                                    RiskFunction::Isotropic(scalar(1.0)),
                                    RiskFunction::Isotropic(scalar(phi))};
    Vector beta(3);
    beta << b, b, 1 - 2 * b;
    const Scenario s(beta, std::move(risks), 2);
    const auto reports = enumerate_split_equilibria(s);
    const EquilibriumReport eq = classify_state(state_for_assignment({{0, 1, 1}}, s), s);
    const double eq_closed = (phi - 1) * (phi - 1) * b * (1 - 2 * b) / (1 - b);
    const double gap = welfare_gap(reports, eq.total_risk);
    const std::string p = param("beta", b);

    // {1,2}/{3} costs b/2; it is the optimum only while b/2 <= eq_closed.
    if (b / 2 <= eq_closed) {
      rows.push_back(closed_form("welfare_gap", p, "optimum_total_risk", reports.front().total_risk,
                                 b / 2, GoldenTag::kClosedForm));
    } else {
      rows.push_back(closed_form("welfare_gap", p, "optimum_total_risk", reports.front().total_risk,
                                 eq_closed, GoldenTag::kOracle));
      rows.push_back(closed_form("welfare_gap", p, "printed_optimum_beta_over_2",
                                 reports.front().total_risk, b / 2, GoldenTag::kReported));
    }
    rows.push_back(closed_form("welfare_gap", p, "equilibrium_theta2", eq.theta(1, 0),
                               (b + (1 - 2 * b) * phi) / (1 - b), GoldenTag::kOracle));
    rows.push_back(closed_form("welfare_gap", p, "equilibrium_total_risk", eq.total_risk, eq_closed,
                               GoldenTag::kOracle));
    rows.push_back(closed_form("welfare_gap", p, "printed_equilibrium_total_risk", eq.total_risk,
                               b + (b - eps) * (b - eps) / (1 - 2 * b), GoldenTag::kReported));
    rows.push_back(check("welfare_gap", p, "equilibrium_asymptotically_stable",
                         eq.stability == Stability::kAsymptoticallyStable));
    rows.push_back({"welfare_gap", p, "gap", gap, kNaN, GoldenTag::kReported, true});
    if (b / 2 <= eq_closed) {
      increasing = increasing && gap > 0.0 && gap > previous_gap;
      previous_gap = gap;
    }
  }
  rows.push_back(check("welfare_gap", "eps=" + std::to_string(eps), "gap_strictly_increasing",
                       increasing && previous_gap > 0.0));
  return rows;
}

std::vector<GoldenRow> predicate_goldens() {
  std::vector<GoldenRow> rows;
  const Vector p1 = scalar(-1.0), p2 = scalar(0.0), p3 = scalar(2.0);
  int agree = 0, compared = 0;
  for (int a = 1; a <= 20; ++a) {
    for (int c = 1; c <= 20; ++c) {
      const double b2 = 0.0245 * a, b3 = 0.0245 * c;
      if (std::abs(three_pop_stability_slack(p1, p2, p3, b2, b3)) <= 1e-6) continue;
      std::vector<RiskFunction> risks{RiskFunction::Isotropic(p1), RiskFunction::Isotropic(p2),
                                      RiskFunction::Isotropic(p3)};
      Vector beta(3);
      beta << 1 - b2 - b3, b2, b3;
      const Scenario s(beta, std::move(risks), 2);
      const bool classifier = classify_state(state_for_assignment({{0, 1, 1}}, s), s).stability ==
                              Stability::kAsymptoticallyStable;
      const bool predicate = three_pop_stability_predicate(p1, p2, p3, b2, b3);
      ++compared;
      agree += classifier == predicate;
      std::ostringstream p;
      p << "beta2=" << b2 << ";beta3=" << b3;
      rows.push_back({"stability_predicate", p.str(), "predicate_vs_classifier",
                      predicate ? 1.0 : 0.0, classifier ? 1.0 : 0.0, GoldenTag::kOracle,
                      classifier == predicate});
    }
  }
  rows.push_back({"stability_predicate", "grid=20x20", "agreement_fraction",
                  compared ? static_cast<double>(agree) / compared : 0.0, 1.0, GoldenTag::kOracle,
                  agree == compared && compared > 0});
  return rows;
}

std::vector<GoldenRow> compute_goldens() {
  std::vector<GoldenRow> rows = minority_goldens();
  for (auto& r : welfare_gap_goldens()) rows.push_back(std::move(r));
  for (auto& r : predicate_goldens()) rows.push_back(std::move(r));
  return rows;
}

}  // namespace popdyn
