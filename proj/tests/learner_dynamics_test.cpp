#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "popdyn/error.hpp"
#include "popdyn/hull.hpp"
#include "popdyn/learner_rules.hpp"
#include "popdyn/model.hpp"
#include "test_support.hpp"

namespace popdyn {
namespace {

using testing::scalar;
using testing::vec;

double max_curvature(const Scenario& s) {
  double hi = 0.0;
  for (const auto& r : s.risks()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(r.curvature());
    hi = std::max(hi, eig.eigenvalues().maxCoeff());
  }
  return hi;
}

TEST(StepSize, InverseTimeSchedule) {
  const StepSchedule s{StepForm::kInverseTime, 1.0};
  EXPECT_EQ(step_size(0, s), 1.0);
  EXPECT_DOUBLE_EQ(step_size(9, s), 0.1);
  EXPECT_EQ(step_size(5, StepSchedule{StepForm::kConstant, 0.3}), 0.3);
  EXPECT_THROW(step_size(-1, s), InvalidArgument);

  double partial = 0.0;
  for (int t = 0; t < 1000000; ++t) partial += step_size(t, s);
  EXPECT_GT(partial, 10.0);
  EXPECT_LT(step_size(999999, s), 1e-5);
}

TEST(GradientStep, Examples) {
  std::vector<RiskFunction> one{RiskFunction::Isotropic(scalar(0.0))};
  EXPECT_DOUBLE_EQ(gradient_step(scalar(1.0), vec({1}), vec({1}), one, 0.25)[0], 0.5);

  std::vector<RiskFunction> two{RiskFunction::Isotropic(scalar(0.0)),
                                RiskFunction::Isotropic(scalar(4.0))};
  // Weighted minimizer of 0.25 * theta^2 + 0.75 * (theta - 4)^2 is 3.
  EXPECT_DOUBLE_EQ(gradient_step(scalar(3.0), vec({1, 1}), vec({0.25, 0.75}), two, 0.4)[0],
                   3.0);
  EXPECT_THROW(gradient_step(scalar(3.0), vec({0, 0}), vec({0.25, 0.75}), two, 0.4),
               EmptyLearner);
  EXPECT_THROW(gradient_step(scalar(3.0), vec({1, 1}), vec({0.25, 0.75}), two, 0.0),
               InvalidArgument);
}

TEST(GradientStep, SufficientDecrease) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4, d = 1 + trial % 3;
    const Scenario s = testing::random_scenario({n, 1, d, false, 2.0, 0.5}, rng);
    const Vector col = testing::random_simplex(n, rng);
    const Vector theta = testing::random_theta(1, d, rng).row(0).transpose();
    // Hessian of the mixture risk is bounded by 2 * max curvature.
    const double gamma = 0.99 / (2.0 * max_curvature(s));
    const Vector next = gradient_step(theta, col, s.beta(), s.risks(), gamma);
    EXPECT_LE(learner_avg_risk(col, s.beta(), s.risks(), next),
              learner_avg_risk(col, s.beta(), s.risks(), theta) + 1e-12);
    EXPECT_TRUE(verify_learner_risk_reducing(theta, next, col, s.beta(), s.risks()));
  }
}

TEST(FullMinimize, Examples) {
  std::vector<RiskFunction> three{RiskFunction::Isotropic(scalar(0)),
                                  RiskFunction::Isotropic(scalar(1)),
                                  RiskFunction::Isotropic(scalar(2))};
  EXPECT_NEAR(full_minimize(vec({1, 1, 1}), Vector::Constant(3, 1.0 / 3), three)[0], 1.0,
              1e-15);

  for (double b : {0.05, 0.3, 0.7, 0.95}) {
    const double phi = 10.0;
    std::vector<RiskFunction> two{RiskFunction::Isotropic(scalar(0)),
                                  RiskFunction::Isotropic(scalar(phi))};
    EXPECT_NEAR(full_minimize(vec({1, 1}), vec({b, 1 - b}), two)[0], (1 - b) * phi, 1e-12);
  }

  // Group {2,3} of a three-subpopulation instance in the plane.
  const Vector p1 = vec({0, 0}), p2 = vec({1, 2}), p3 = vec({-3, 0.5});
  std::vector<RiskFunction> plane{RiskFunction::Isotropic(p1), RiskFunction::Isotropic(p2),
                                  RiskFunction::Isotropic(p3)};
  const double b2 = 0.2, b3 = 0.5;
  const Vector theta = full_minimize(vec({0, 1, 1}), vec({0.3, b2, b3}), plane);
  const Vector expected = (b2 * p2 + b3 * p3) / (b2 + b3);
  EXPECT_LE((theta - expected).norm(), 1e-14);

  EXPECT_THROW(full_minimize(vec({0, 0, 0}), vec({0.3, b2, b3}), plane), EmptyLearner);
}

TEST(FullMinimize, OptimalityAndMethodAgreement) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 5, d = 1 + trial % 3;
    const Scenario s = testing::random_scenario({n, 1, d, false, 3.0, 1.0}, rng);
    const Vector col = testing::random_simplex(n, rng);
    const Vector closed = full_minimize(col, s.beta(), s.risks());
    const Vector newton =
        full_minimize(col, s.beta(), s.risks(), MinimizeMethod::kNewton, 1e-12, 50);
    EXPECT_LE(learner_risk_gradient(col, s.beta(), s.risks(), closed).norm(), 1e-9);
    EXPECT_LE((closed - newton).norm(), 1e-8);
  }
}

TEST(FullMinimize, IdentityCurvatureStaysInHullOfCenters) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 4, d = 1 + trial % 2;
    const Scenario s = testing::random_scenario({n, 1, d, true, 2.0, 0.0}, rng);
    Vector col = testing::random_simplex(n, rng);
    if (trial % 3 == 0) col[0] = 0.0;
    const Vector theta = full_minimize(col, s.beta(), s.risks());
    std::vector<Vector> support;
    for (int i = 0; i < n; ++i) {
      if (col[i] > 0) support.push_back(s.risk(i).center());
    }
    const std::vector<Vector> point{theta};
    EXPECT_TRUE(convex_hulls_intersect(support, point, 1e-9)) << "trial " << trial;
  }
}

TEST(FullMinimize, NewtonOnCustomRisk) {
  // cosh(theta - c) is strongly convex on bounded sets; add theta^2 for margin.
  auto make = [](double c) {
    return RiskFunction::Custom(
        1, [c](const Vector& t) { return std::cosh(t[0] - c) + 0.1 * t[0] * t[0]; },
        [c](const Vector& t) { return scalar(std::sinh(t[0] - c) + 0.2 * t[0]); },
        [c](const Vector& t) { return Matrix::Constant(1, 1, std::cosh(t[0] - c) + 0.2); });
  };
  std::vector<RiskFunction> risks{make(8.0), make(-1.0)};
  const Vector theta = full_minimize(vec({1, 1}), vec({0.5, 0.5}), risks);
  EXPECT_LE(learner_risk_gradient(vec({1, 1}), vec({0.5, 0.5}), risks, theta).norm(), 1e-10);
  EXPECT_TRUE(verify_learner_risk_reducing(scalar(-20.0), theta, vec({1, 1}),
                                           vec({0.5, 0.5}), risks));
  EXPECT_THROW(full_minimize(vec({1, 1}), vec({0.5, 0.5}), risks, MinimizeMethod::kNewton,
                             1e-300, 1),
               ConvergenceFailure);
}

TEST(VerifyLearnerRiskReducing, Examples) {
  std::vector<RiskFunction> two{RiskFunction::Isotropic(scalar(0)),
                                RiskFunction::Isotropic(scalar(2))};
  const Vector col = vec({1, 1}), beta = vec({0.5, 0.5});
  const Vector opt = full_minimize(col, beta, two);
  EXPECT_TRUE(verify_learner_risk_reducing(scalar(-4.0), opt, col, beta, two));
  const Vector start = scalar(2.5);
  const Vector grad = learner_risk_gradient(col, beta, two, start);
  EXPECT_TRUE(verify_learner_risk_reducing(start, start - 0.1 * grad, col, beta, two));
  EXPECT_FALSE(verify_learner_risk_reducing(start, start + 0.1 * grad, col, beta, two));
}

TEST(RepeatedGradientDescent, ConvergesToFullMinimizer) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3, d = 1 + trial % 2;
    std::vector<RiskFunction> risks;
    std::normal_distribution<double> g(0.0, 2.0);
    for (int i = 0; i < n; ++i) {
      risks.push_back(RiskFunction::Quadratic(Vector::NullaryExpr(d, [&]() { return g(rng); }),
                                              testing::random_spd(d, rng, 0.8, 1.2)));
    }
    const Vector beta = Vector::Constant(n, 1.0 / n);
    const Vector col = testing::random_simplex(n, rng);
    // Mixture Hessian eigenvalues lie in [1.6, 2.4]; base * 1.6 = 2.4 gives
    // error decay of order t^-2.4.
    LearnerRule rule;
    rule.kind = LearnerKind::kRepeatedGd;
    rule.schedule = {StepForm::kInverseTime, 1.5};
    Vector theta = Vector::Zero(d);
    for (int t = 0; t < 10000; ++t) {
      theta = apply_learner_rule(rule, t, theta, col, beta, risks);
    }
    EXPECT_LE((theta - full_minimize(col, beta, risks)).norm(), 1e-4) << "trial " << trial;
  }
}

}  // namespace
}  // namespace popdyn
