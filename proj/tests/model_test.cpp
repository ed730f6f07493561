#include <gtest/gtest.h>

#include <random>

#include "popdyn/error.hpp"
#include "popdyn/model.hpp"
#include "test_support.hpp"

namespace popdyn {
namespace {

using testing::scalar;
using testing::vec;

TEST(RiskValue, QuadraticExamples) {
  EXPECT_EQ(risk_value(RiskFunction::Isotropic(Vector::Zero(2)), Vector::Zero(2)), 0.0);
  EXPECT_EQ(risk_value(RiskFunction::Isotropic(scalar(1.0)), scalar(0.0)), 1.0);

  const double b = 0.3, eps = 0.01;
  const double phi = (1 - b) / (1 - 2 * b) - eps;
  EXPECT_EQ(risk_value(RiskFunction::Isotropic(scalar(phi)), scalar(phi)), 0.0);
}

TEST(RiskValue, DimensionMismatchThrows) {
  const auto r = RiskFunction::Isotropic(Vector::Zero(2));
  EXPECT_THROW(risk_value(r, Vector::Zero(3)), InvalidArgument);
  EXPECT_THROW(risk_gradient(r, Vector::Zero(1)), InvalidArgument);
  EXPECT_THROW(risk_hessian(r, Vector::Zero(1)), InvalidArgument);
}

TEST(RiskFunction, RejectsBadCurvature) {
  Matrix not_pd(2, 2);
  not_pd << 1, 0, 0, -1;
  EXPECT_THROW(RiskFunction::Quadratic(Vector::Zero(2), not_pd), InvalidArgument);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(RiskFunction::Quadratic(Vector::Zero(2), asym), InvalidArgument);
  EXPECT_THROW(RiskFunction::Isotropic(Vector::Zero(2), -1.0), InvalidArgument);
}

TEST(RiskGradient, Examples) {
  EXPECT_EQ(risk_gradient(RiskFunction::Isotropic(Vector::Zero(3)), Vector::Zero(3)),
            Vector::Zero(3));
  EXPECT_DOUBLE_EQ(risk_gradient(RiskFunction::Isotropic(scalar(0.0)), scalar(3.0))[0], 6.0);
}

TEST(RiskGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const Vector c = Vector::NullaryExpr(d, [&]() { return g(rng); });
    const auto r = RiskFunction::Quadratic(c, testing::random_spd(d, rng), 0.5);
    const Vector x = Vector::NullaryExpr(d, [&]() { return g(rng); });
    const Vector fd = testing::fd_gradient([&](const Vector& t) { return r.Value(t); }, x);
    const Vector an = risk_gradient(r, x);
    EXPECT_LE((fd - an).norm(), 1e-5 * std::max(1.0, an.norm())) << "trial " << trial;
  }
}

TEST(RiskHessian, ExamplesAndFiniteDifferences) {
  EXPECT_EQ(risk_hessian(RiskFunction::Isotropic(Vector::Zero(2)), vec({5, -1})),
            2.0 * Matrix::Identity(2, 2));
  Matrix a = Matrix::Zero(2, 2);
  a.diagonal() << 1, 4;
  Matrix expected = Matrix::Zero(2, 2);
  expected.diagonal() << 2, 8;
  EXPECT_EQ(risk_hessian(RiskFunction::Quadratic(Vector::Zero(2), a), vec({0.3, 0.1})),
            expected);

  std::mt19937_64 rng(5);
  const auto r = RiskFunction::Quadratic(vec({1, -2, 0.5}), testing::random_spd(3, rng));
  const Vector x = vec({0.2, 0.7, -1.1});
  const double h = 1e-6;
  Matrix fd(3, 3);
  for (int k = 0; k < 3; ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    fd.col(k) = (r.Gradient(xp) - r.Gradient(xm)) / (2 * h);
  }
  EXPECT_LE((fd - risk_hessian(r, x)).norm(), 1e-5);
}

TEST(RiskFunction, StrongConvexitySanity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  const Vector c = vec({0.4, -0.2});
  const auto r = RiskFunction::Quadratic(c, testing::random_spd(2, rng), 1.5);
  EXPECT_EQ(r.Value(c), 1.5);
  EXPECT_EQ(r.Gradient(c), Vector::Zero(2));
  for (int k = 0; k < 200; ++k) {
    const Vector x = c + Vector::NullaryExpr(2, [&]() { return g(rng); });
    EXPECT_GT(r.Value(x) - r.offset(), 0.0);
  }
}

TEST(RiskFunction, CustomKindUsesCallbacks) {
  // R(theta) = cosh(theta - 1) + theta^2: strongly convex, not quadratic.
  auto r = RiskFunction::Custom(
      1, [](const Vector& t) { return std::cosh(t[0] - 1) + t[0] * t[0]; },
      [](const Vector& t) { return scalar(std::sinh(t[0] - 1) + 2 * t[0]); },
      [](const Vector& t) {
        return Matrix::Constant(1, 1, std::cosh(t[0] - 1) + 2);
      });
  EXPECT_EQ(r.kind(), RiskKind::kCustom);
  EXPECT_DOUBLE_EQ(risk_value(r, scalar(1.0)), 2.0);
  EXPECT_FALSE(r.has_center());
  EXPECT_THROW(r.center(), InvalidArgument);
  EXPECT_THROW(r.curvature(), InvalidArgument);
}

TEST(AllocationMatrix, ValidatesRows) {
  Matrix a(2, 2);
  a << 0.5, 0.5, 0.7, 0.2;
  try {
    AllocationMatrix bad(a);
    FAIL() << "expected InvalidState";
  } catch (const InvalidState& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
  a << 0.5, 0.5, 1.2, -0.2;
  EXPECT_THROW(AllocationMatrix{a}, InvalidState);
  EXPECT_NO_THROW(AllocationMatrix::Uniform(4, 3));
}

TEST(Scenario, Validation) {
  std::vector<RiskFunction> risks{RiskFunction::Isotropic(scalar(0)),
                                  RiskFunction::Isotropic(scalar(1))};
  EXPECT_THROW(Scenario(vec({0.5, 0.6}), risks, 1), InvalidArgument);
  EXPECT_THROW(Scenario(vec({1.0, 0.0}), risks, 1), InvalidArgument);
  EXPECT_THROW(Scenario(vec({0.5, 0.5}), risks, 3), InvalidArgument);
  EXPECT_THROW(Scenario(vec({0.5, 0.5}), risks, 0), InvalidArgument);
  std::vector<RiskFunction> mixed{RiskFunction::Isotropic(scalar(0)),
                                  RiskFunction::Isotropic(Vector::Zero(2))};
  EXPECT_THROW(Scenario(vec({0.5, 0.5}), mixed, 1), InvalidArgument);
  AllocationRule bad_rule;
  bad_rule.gamma = 0.0;
  EXPECT_THROW(Scenario(vec({0.5, 0.5}), risks, 1, bad_rule), InvalidArgument);
  EXPECT_NO_THROW(Scenario(vec({0.5, 0.5}), risks, 2));
}

TEST(SubpopAvgRisk, Examples) {
  const auto r = RiskFunction::Isotropic(scalar(0.0));
  Matrix theta(2, 1);
  theta << 0.0, 7.0;
  EXPECT_EQ(subpop_avg_risk(vec({1, 0}), theta, r), 0.0);
  theta << 0.0, 2.0;
  EXPECT_DOUBLE_EQ(subpop_avg_risk(vec({0.5, 0.5}), theta, r), 2.0);
  const Matrix same = Matrix::Constant(3, 1, 1.7);
  EXPECT_NEAR(subpop_avg_risk(Vector::Constant(3, 1.0 / 3), same, r), r.Value(scalar(1.7)),
              1e-14);
  EXPECT_THROW(subpop_avg_risk(vec({0.5, 0.6}), theta, r), InvalidState);
}

TEST(SubpopAvgRisk, LinearInAllocationRow) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto r = RiskFunction::Quadratic(vec({0.3, -1}), testing::random_spd(2, rng), 0.2);
  for (int k = 0; k < 50; ++k) {
    const Matrix theta = testing::random_theta(4, 2, rng);
    const Vector a = testing::random_simplex(4, rng);
    const Vector b = testing::random_simplex(4, rng);
    const double lam = u(rng);
    const double mixed = subpop_avg_risk(lam * a + (1 - lam) * b, theta, r);
    const double expected =
        lam * subpop_avg_risk(a, theta, r) + (1 - lam) * subpop_avg_risk(b, theta, r);
    EXPECT_NEAR(mixed, expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(LearnerAvgRisk, Examples) {
  std::vector<RiskFunction> one{RiskFunction::Isotropic(scalar(2.0))};
  EXPECT_DOUBLE_EQ(learner_avg_risk(vec({1}), vec({1}), one, scalar(0.5)), 2.25);

  std::vector<RiskFunction> two{RiskFunction::Isotropic(scalar(0.0)),
                                RiskFunction::Isotropic(scalar(1.0))};
  EXPECT_DOUBLE_EQ(learner_avg_risk(vec({1, 1}), vec({0.5, 0.5}), two, scalar(0.0)), 0.5);

  const double base = learner_avg_risk(vec({0.3, 0.8}), vec({0.5, 0.5}), two, scalar(0.4));
  for (double s : {1e-3, 0.5, 7.0}) {
    EXPECT_NEAR(learner_avg_risk(s * vec({0.3, 0.8}), vec({0.5, 0.5}), two, scalar(0.4)),
                base, 1e-14);
  }
  EXPECT_THROW(learner_avg_risk(vec({0, 0}), vec({0.5, 0.5}), two, scalar(0.0)),
               EmptyLearner);
}

TEST(TotalRisk, GoldenValues) {
  // Every learner at its only subpopulation's optimum, zero offsets.
  std::vector<RiskFunction> risks{RiskFunction::Isotropic(scalar(0)),
                                  RiskFunction::Isotropic(scalar(1)),
                                  RiskFunction::Isotropic(scalar(5))};
  const Scenario s(Vector::Constant(3, 1.0 / 3), risks, 3);
  Matrix theta(3, 1);
  theta << 0, 1, 5;
  const std::vector<int> id{0, 1, 2};
  EXPECT_EQ(total_risk({AllocationMatrix::FromAssignment(id, 3), theta, 0}, s), 0.0);

  // Single learner serving a majority and a minority.
  for (double b : {0.1, 0.4, 0.9}) {
    const double phi = 10.0;
    const Scenario one(vec({b, 1 - b}),
                       {RiskFunction::Isotropic(scalar(0)), RiskFunction::Isotropic(scalar(phi))},
                       1);
    const SystemState st{AllocationMatrix::Uniform(2, 1),
                         Matrix::Constant(1, 1, (1 - b) * phi), 0};
    EXPECT_NEAR(total_risk(st, one), b * (1 - b) * phi * phi, 1e-9);
  }

  // Welfare optimum of the two-learner, three-subpopulation gap instance.
  for (double b : {0.3, 0.45}) {
    const double eps = 0.01;
    const Scenario s39 = testing::welfare_trap_scenario(b, eps);
    Matrix th(2, 1);
    th << 0.5, s39.risk(2).center()[0];
    const std::vector<int> grouping{0, 0, 1};
    EXPECT_NEAR(total_risk({AllocationMatrix::FromAssignment(grouping, 2), th, 0}, s39),
                b / 2, 1e-12);
  }
}

TEST(TotalRisk, DecompositionIdentity) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5, m = 1 + trial % 3, d = 1 + trial % 3;
    const Scenario s = testing::random_scenario({n, std::min(m, n), d, false, 2.0, 1.0}, rng);
    const SystemState st{testing::random_allocation(s.n(), s.m(), rng),
                         testing::random_theta(s.m(), d, rng), 0};
    const double total = total_risk(st, s);
    EXPECT_NEAR(total, testing::brute_total_risk(st.alpha.matrix(), st.theta, s), 1e-10);

    double by_subpop = 0.0;
    for (int i = 0; i < s.n(); ++i) {
      by_subpop += s.beta()[i] * subpop_avg_risk(st.alpha.row(i), st.theta, s.risk(i));
    }
    double by_learner = 0.0;
    for (int j = 0; j < s.m(); ++j) {
      const Vector col = st.alpha.col(j);
      by_learner += learner_mass(col, s.beta()) *
                    learner_avg_risk(col, s.beta(), s.risks(), st.theta_of(j));
    }
    EXPECT_NEAR(by_subpop, total, 1e-10);
    EXPECT_NEAR(by_learner, total, 1e-10);
  }
}

TEST(TotalRisk, ShapeMismatchThrows) {
  const Scenario s = testing::three_point_scenario();
  const SystemState bad{AllocationMatrix::Uniform(3, 2), Matrix::Zero(3, 1), 0};
  EXPECT_THROW(total_risk(bad, s), InvalidArgument);
}

}  // namespace
}  // namespace popdyn
