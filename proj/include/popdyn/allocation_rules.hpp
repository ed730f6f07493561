#pragma once

#include "popdyn/risk.hpp"
#include "popdyn/types.hpp"

namespace popdyn {

enum class AllocationKind { kMwud, kBestResponse };

// How MWUD turns a learner's risk into the exponent weight.
enum class Comparison { kAbsolute, kRelative };

enum class TiePolicy { kSplitEvenly, kKeepPrevious };

/// Configuration of the per-subpopulation allocation update.
struct AllocationRule {
  AllocationKind kind = AllocationKind::kMwud;
  // mwud
  double gamma = 1.0;
  Comparison comparison = Comparison::kAbsolute;
  // best_response
  double tie_tolerance = 0.0;
  TiePolicy tie_policy = TiePolicy::kSplitEvenly;

  void Validate() const;
};

/// One multiplicative-weights update of a single allocation row.
///
/// Returns the row proportional to alpha_j * exp(-gamma * c_j), where c_j is
/// the learner's risk (absolute) or that risk divided by `prev_mix_risk`, the
/// subpopulation's mixture risk before the update (relative). The exponent is
/// shifted by its minimum before exponentiating; zero entries stay zero.
Vector mwud_step(const Vector& alpha_row, const Vector& risk_vector,
                 double gamma, Comparison comparison,
                 double prev_mix_risk = 0.0);

/// Stateless best response: all mass on the minimum-risk learner(s).
Vector best_response_step(const Vector& alpha_row, const Vector& risk_vector,
                          double tie_tolerance, TiePolicy tie_policy);

// Dispatches on rule.kind; the relative MWUD denominator is computed here.
Vector apply_allocation_rule(const AllocationRule& rule, const Vector& alpha_row,
                             const Vector& risk_vector);

/// True iff the mixture risk of `alpha_after` does not exceed that of
/// `alpha_before` by more than 1e-10, with learners fixed at `theta_all`.
bool verify_risk_reducing(const AllocationRule& rule, const Vector& alpha_before,
                          const Vector& alpha_after, const Matrix& theta_all,
                          const RiskFunction& risk);

}  // namespace popdyn
