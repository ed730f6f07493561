#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "popdyn/types.hpp"

namespace popdyn {

enum class RiskKind { kQuadratic, kCustom };

/// Strongly convex risk of one subpopulation.
///
/// The quadratic kind is R(theta) = (theta - center)' A (theta - center) + offset
/// with A symmetric positive definite. The custom kind wraps user callbacks
/// and is trusted to be strongly convex; its minimizer is optional and only
/// needed by routines that reason about subpopulation optima directly.
class RiskFunction {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  static RiskFunction Quadratic(Vector center, Matrix curvature,
                                double offset = 0.0);
  // Identity curvature.
  static RiskFunction Isotropic(Vector center, double offset = 0.0);
  static RiskFunction Custom(int dim, ValueFn value, GradientFn gradient,
                             HessianFn hessian,
                             std::optional<Vector> minimizer = std::nullopt);

  RiskKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool has_center() const { return center_.has_value(); }
  // Throws InvalidArgument for a custom risk without a known minimizer.
  const Vector& center() const;
  // Quadratic kind only.
  const Matrix& curvature() const;
  double offset() const { return offset_; }
  bool has_identity_curvature() const;

  double Value(const Vector& theta) const;
  Vector Gradient(const Vector& theta) const;
  Matrix Hessian(const Vector& theta) const;

 private:
  RiskFunction() = default;
  void CheckDim(const Vector& theta) const;

  RiskKind kind_ = RiskKind::kQuadratic;
  int dim_ = 0;
  std::optional<Vector> center_;
  Matrix curvature_;
  double offset_ = 0.0;
  std::shared_ptr<const ValueFn> value_fn_;
  std::shared_ptr<const GradientFn> gradient_fn_;
  std::shared_ptr<const HessianFn> hessian_fn_;
};

double risk_value(const RiskFunction& risk, const Vector& theta);
Vector risk_gradient(const RiskFunction& risk, const Vector& theta);
Matrix risk_hessian(const RiskFunction& risk, const Vector& theta);

}  // namespace popdyn
