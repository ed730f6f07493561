#include "popdyn/allocation_rules.hpp"

#include <cmath>
#include <limits>

#include "popdyn/error.hpp"
#include "popdyn/model.hpp"
#include "popdyn/simplex.hpp"

namespace popdyn {

void AllocationRule::Validate() const {
  if (kind == AllocationKind::kMwud && !(gamma > 0.0 && std::isfinite(gamma))) {
    throw InvalidArgument("mwud gamma must be positive and finite");
  }
  if (!(tie_tolerance >= 0.0)) {
    throw InvalidArgument("tie_tolerance must be >= 0");
  }
}

Vector mwud_step(const Vector& alpha_row, const Vector& risk_vector,
                 double gamma, Comparison comparison, double prev_mix_risk) {
  require_simplex(alpha_row, "allocation row");
  if (risk_vector.size() != alpha_row.size()) {
    throw InvalidArgument("risk vector length differs from allocation row");
  }
  if (!risk_vector.allFinite()) throw InvalidArgument("risk vector not finite");
  if (!(gamma > 0.0)) throw InvalidArgument("mwud gamma must be positive");

  double scale = 1.0;
  if (comparison == Comparison::kRelative) {
    if (!(prev_mix_risk > 0.0)) {
      throw InvalidArgument("relative comparison needs a positive mixture risk");
    }
    scale = 1.0 / prev_mix_risk;
  }

  const auto m = alpha_row.size();
  Vector exponent = gamma * scale * risk_vector;
  double shift = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < m; ++j) {
    if (alpha_row[j] > 0.0) shift = std::min(shift, exponent[j]);
  }

  Vector next = Vector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (alpha_row[j] > 0.0) {
      next[j] = alpha_row[j] * std::exp(-(exponent[j] - shift));
    }
  }
  const double total = next.sum();
  if (!(total > 0.0)) throw NumericUnderflow("mwud weights underflowed");
  return next / total;
}

Vector best_response_step(const Vector& alpha_row, const Vector& risk_vector,
                          double tie_tolerance, TiePolicy tie_policy) {
  if (risk_vector.size() == 0) throw InvalidArgument("empty risk vector");
  if (!risk_vector.allFinite()) throw InvalidArgument("risk vector not finite");
  const auto m = risk_vector.size();
  const double best = risk_vector.minCoeff();

  Vector tied = Vector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (risk_vector[j] <= best + tie_tolerance) tied[j] = 1.0;
  }

  if (tie_policy == TiePolicy::kKeepPrevious && alpha_row.size() == m) {
    const Vector kept = alpha_row.cwiseMax(0.0).cwiseProduct(tied);
    if (kept.sum() > 0.0) return kept / kept.sum();
  }
  return tied / tied.sum();
}

Vector apply_allocation_rule(const AllocationRule& rule, const Vector& alpha_row,
                             const Vector& risk_vector) {
  switch (rule.kind) {
    case AllocationKind::kMwud: {
      double mix = 0.0;
      if (rule.comparison == Comparison::kRelative) {
        mix = alpha_row.dot(risk_vector);
        // Zero mixture risk with nonnegative risks means every supported
        // learner is already risk-free for this subpopulation.
        if (!(mix > 0.0)) return alpha_row;
      }
      return mwud_step(alpha_row, risk_vector, rule.gamma, rule.comparison, mix);
    }
    case AllocationKind::kBestResponse:
      return best_response_step(alpha_row, risk_vector, rule.tie_tolerance,
                                 rule.tie_policy);
  }
  throw InvalidArgument("unknown allocation rule");
}

bool verify_risk_reducing(const AllocationRule& /*rule*/,
                          const Vector& alpha_before, const Vector& alpha_after,
                          const Matrix& theta_all, const RiskFunction& risk) {
  const double before = subpop_avg_risk(alpha_before, theta_all, risk);
  const double after = subpop_avg_risk(alpha_after, theta_all, risk);
  return after <= before + 1e-10;
}

}  // namespace popdyn
