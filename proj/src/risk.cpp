#include "popdyn/risk.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "popdyn/error.hpp"

namespace popdyn {

RiskFunction RiskFunction::Quadratic(Vector center, Matrix curvature,
                                     double offset) {
  const auto d = center.size();
  if (d == 0) throw InvalidArgument("risk center must be non-empty");
  if (curvature.rows() != d || curvature.cols() != d) {
    throw InvalidArgument("curvature must be " + std::to_string(d) + "x" +
                          std::to_string(d));
  }
  if (!center.allFinite() || !curvature.allFinite() || !std::isfinite(offset)) {
    throw InvalidArgument("risk parameters must be finite");
  }
  if (offset < 0.0) throw InvalidArgument("risk offset must be >= 0");
  if (!curvature.isApprox(curvature.transpose(), 1e-12)) {
    throw InvalidArgument("curvature must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(curvature, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidArgument("curvature must be positive definite");
  }
  RiskFunction r;
  r.kind_ = RiskKind::kQuadratic;
  r.dim_ = static_cast<int>(d);
  r.center_ = std::move(center);
  r.curvature_ = std::move(curvature);
  r.offset_ = offset;
  return r;
}

RiskFunction RiskFunction::Isotropic(Vector center, double offset) {
  const auto d = center.size();
  return Quadratic(std::move(center), Matrix::Identity(d, d), offset);
}

RiskFunction RiskFunction::Custom(int dim, ValueFn value, GradientFn gradient,
                                  HessianFn hessian,
                                  std::optional<Vector> minimizer) {
  if (dim <= 0) throw InvalidArgument("custom risk dimension must be > 0");
  if (!value || !gradient || !hessian) {
    throw InvalidArgument("custom risk needs value, gradient and Hessian");
  }
  if (minimizer && minimizer->size() != dim) {
    throw InvalidArgument("custom risk minimizer has wrong dimension");
  }
  RiskFunction r;
  r.kind_ = RiskKind::kCustom;
  r.dim_ = dim;
  r.center_ = std::move(minimizer);
  r.value_fn_ = std::make_shared<const ValueFn>(std::move(value));
  r.gradient_fn_ = std::make_shared<const GradientFn>(std::move(gradient));
  r.hessian_fn_ = std::make_shared<const HessianFn>(std::move(hessian));
  return r;
}

const Vector& RiskFunction::center() const {
  if (!center_) throw InvalidArgument("custom risk has no known minimizer");
  return *center_;
}

const Matrix& RiskFunction::curvature() const {
  if (kind_ != RiskKind::kQuadratic) {
    throw InvalidArgument("curvature is defined for quadratic risks only");
  }
  return curvature_;
}

bool RiskFunction::has_identity_curvature() const {
  return kind_ == RiskKind::kQuadratic &&
         curvature_ == Matrix::Identity(dim_, dim_);
}

void RiskFunction::CheckDim(const Vector& theta) const {
  if (theta.size() != dim_) {
    throw InvalidArgument("parameter has length " +
                          std::to_string(theta.size()) + ", risk expects " +
                          std::to_string(dim_));
  }
}

double RiskFunction::Value(const Vector& theta) const {
  CheckDim(theta);
  if (kind_ == RiskKind::kCustom) return (*value_fn_)(theta);
  const Vector diff = theta - *center_;
  return diff.dot(curvature_ * diff) + offset_;
}

Vector RiskFunction::Gradient(const Vector& theta) const {
  CheckDim(theta);
  if (kind_ == RiskKind::kCustom) return (*gradient_fn_)(theta);
  return 2.0 * curvature_ * (theta - *center_);
}

Matrix RiskFunction::Hessian(const Vector& theta) const {
  CheckDim(theta);
  if (kind_ == RiskKind::kCustom) return (*hessian_fn_)(theta);
  return 2.0 * curvature_;
}

double risk_value(const RiskFunction& risk, const Vector& theta) {
  return risk.Value(theta);
}

Vector risk_gradient(const RiskFunction& risk, const Vector& theta) {
  return risk.Gradient(theta);
}

Matrix risk_hessian(const RiskFunction& risk, const Vector& theta) {
  return risk.Hessian(theta);
}

}  // namespace popdyn
