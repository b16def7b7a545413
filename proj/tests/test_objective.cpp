#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "alnet/errors.hpp"
#include "alnet/harness.hpp"
#include "alnet/objective.hpp"
#include "oracles.hpp"

using namespace alnet;

namespace {

std::shared_ptr<const NodeCost> scalar_quadratic(double center) {
  // 1/2 (x - c)^2 = 1/2 x^2 - c x + c^2/2
  return std::make_shared<QuadraticCost>(Eigen::MatrixXd::Identity(1, 1),
                                         Eigen::VectorXd::Constant(1, -center), 0.5 * center * center);
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

TEST(EvalStack, HalfSquareAtZero) {
  ObjectiveStack s({scalar_quadratic(0.0), scalar_quadratic(0.0), scalar_quadratic(0.0)});
  EXPECT_EQ(eval_stack(s, Eigen::VectorXd::Zero(3)), 0.0);
  EXPECT_EQ(grad_stack(s, Eigen::VectorXd::Zero(3)), Eigen::VectorXd::Zero(3));
}

TEST(EvalStack, EachTermAtItsMinimizer) {
  ObjectiveStack s({scalar_quadratic(1.0), scalar_quadratic(2.0)});
  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  EXPECT_EQ(eval_stack(s, x), 0.0);
  EXPECT_EQ(grad_stack(s, x), Eigen::VectorXd::Zero(2));
}

TEST(EvalStack, LogisticMatchesScalarOracle) {
  const int n = 10, d = 15;
  const LogisticDataset data = sample_logistic_dataset(n, d, 3);
  const ObjectiveStack s = logistic_stack(data, 1.0);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd x = random_vector(n * d, rng, 0.5);
    double ref = 0.0;
    for (int i = 0; i < n; ++i) {
      ref += oracle::logistic_value(data.features.row(i).transpose(), data.labels(i), 1.0, n,
                                    x.segment(i * d, d));
    }
    EXPECT_NEAR(eval_stack(s, x), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(EvalStack, DimensionMismatch) {
  ObjectiveStack s({scalar_quadratic(0.0), scalar_quadratic(1.0)});
  EXPECT_THROW(eval_stack(s, Eigen::VectorXd::Zero(3)), DimensionError);
  EXPECT_THROW(grad_stack(s, Eigen::VectorXd::Zero(1)), DimensionError);
}

TEST(GradStack, QuadraticMinimizerIsStationary) {
  const auto q = oracle::random_quadratics(4, 3, 8);
  const ObjectiveStack s = q.stack();
  Eigen::VectorXd x(12);
  for (int i = 0; i < 4; ++i) x.segment(i * 3, 3) = q.a[i].ldlt().solve(-q.b[i]);
  EXPECT_LE(grad_stack(s, x).norm(), 1e-12);
}

TEST(GradStack, LogisticMatchesFiniteDifferences) {
  const int n = 6, d = 5;
  const ObjectiveStack s = generate_logistic_data(n, d, 1.0, 11);
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd x = random_vector(n * d, rng);
    const Eigen::VectorXd fd =
        oracle::fd_gradient([&](const Eigen::VectorXd& y) { return eval_stack(s, y); }, x);
    const Eigen::VectorXd g = grad_stack(s, x);
    EXPECT_LE((g - fd).norm(), 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST(GradStack, BlockwiseDecomposition) {
  const int n = 5, d = 4;
  const ObjectiveStack s = generate_logistic_data(n, d, 1.0, 21);
  std::mt19937_64 rng(22);
  const Eigen::VectorXd x = random_vector(n * d, rng);
  const Eigen::VectorXd g = grad_stack(s, x);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd y = x;
    y.segment(j * d, d) += random_vector(d, rng);
    const Eigen::VectorXd gy = grad_stack(s, y);
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      EXPECT_EQ(gy.segment(i * d, d), g.segment(i * d, d));
    }
  }
}

TEST(LogisticBounds, DirectArithmetic) {
  Eigen::VectorXd a(3);
  a << 1.0, -1.0, 1.0;  // |c|^2 = 3 + 1 = 4
  const LogisticCost c(a, 1.0, 1.0, 10);
  const HessianBounds hb = logistic_hessian_bounds(c);
  EXPECT_NEAR(hb.min, 0.1, 1e-15);
  EXPECT_NEAR(hb.max, 1.1, 1e-15);
}

TEST(LogisticBounds, ConditionNumberFromBounds) {
  Eigen::VectorXd big(3), small(3);
  big << 1.0, -1.0, 1.0;
  small << 0.1, 0.2, 0.0;
  std::vector<std::shared_ptr<const NodeCost>> costs;
  costs.push_back(std::make_shared<LogisticCost>(big, -1.0, 1.0, 10));
  for (int i = 0; i < 9; ++i) costs.push_back(std::make_shared<LogisticCost>(small, 1.0, 1.0, 10));
  const ObjectiveStack s(costs);
  EXPECT_NEAR(condition_number(s), 11.0, 1e-12);
}

TEST(ConditionNumber, IdenticalHalfSquares) {
  ObjectiveStack s({scalar_quadratic(0.0), scalar_quadratic(0.0)});
  EXPECT_EQ(condition_number(s), 1.0);
}

TEST(LogisticBounds, SampledCurvatureWithinBounds) {
  // Finite-difference Hessian-vector products along random directions.
  const LogisticDataset data = sample_logistic_dataset(4, 6, 31);
  const ObjectiveStack s = logistic_stack(data, 1.0);
  std::mt19937_64 rng(32);
  for (int t = 0; t < 10000; ++t) {
    const auto& c = s.cost(t % 4);
    const HessianBounds hb = c.hessian_bounds();
    const Eigen::VectorXd x = random_vector(6, rng, 2.0);
    Eigen::VectorXd v = random_vector(6, rng);
    v.normalize();
    const double h = 1e-5;
    const Eigen::VectorXd hv = (c.gradient(x + h * v) - c.gradient(x - h * v)) / (2 * h);
    const double curvature = v.dot(hv);
    EXPECT_GE(curvature, hb.min - 1e-7);
    EXPECT_LE(curvature, hb.max + 1e-7);
  }
}

TEST(NodeCost, StrongConvexityAndLipschitzOnSampledPairs) {
  const ObjectiveStack logistic = generate_logistic_data(5, 4, 1.0, 41);
  const auto quad = oracle::random_quadratics(5, 4, 42).stack();
  std::mt19937_64 rng(43);
  for (const ObjectiveStack* s : {&logistic, &quad}) {
    for (int t = 0; t < 10000; ++t) {
      const auto& c = s->cost(t % 5);
      const HessianBounds hb = c.hessian_bounds();
      const Eigen::VectorXd x = random_vector(4, rng, 2.0);
      const Eigen::VectorXd y = random_vector(4, rng, 2.0);
      const Eigen::VectorXd gx = c.gradient(x);
      const double lower = c.value(x) + gx.dot(y - x) + 0.5 * hb.min * (x - y).squaredNorm();
      EXPECT_GE(c.value(y), lower - 1e-9);
      EXPECT_LE((gx - c.gradient(y)).norm(), hb.max * (x - y).norm() + 1e-9);
    }
  }
}

TEST(QuadraticCost, BoundsAreExtremeEigenvalues) {
  Eigen::MatrixXd a(2, 2);
  a << 3.0, 1.0, 1.0, 3.0;
  const QuadraticCost q(a, Eigen::Vector2d(1.0, -1.0));
  EXPECT_NEAR(q.hessian_bounds().min, 2.0, 1e-14);
  EXPECT_NEAR(q.hessian_bounds().max, 4.0, 1e-14);
  EXPECT_LE(q.gradient(q.minimizer()).norm(), 1e-14);
}

TEST(QuadraticCost, RejectsInvalidMatrices) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 2.0, 0.0, 1.0;
  EXPECT_THROW(QuadraticCost(a, Eigen::Vector2d::Zero()), ConfigError);
  a << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(QuadraticCost(a, Eigen::Vector2d::Zero()), ConfigError);
  EXPECT_THROW(QuadraticCost(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector3d::Zero()), DimensionError);
}

TEST(LogisticCost, StableForLargeMargins) {
  Eigen::VectorXd a(1);
  a << 1.0;
  const LogisticCost c(a, 1.0, 1.0, 1);
  const Eigen::Vector2d far(1000.0, 0.0), neg(-1000.0, 0.0);
  EXPECT_TRUE(std::isfinite(c.value(far)));
  EXPECT_TRUE(std::isfinite(c.value(neg)));
  EXPECT_NEAR(c.value(neg), 1000.0 + 0.5 * 1e6, 1e-6);
  EXPECT_TRUE(c.gradient(neg).allFinite());
}

TEST(LogisticCost, RejectsInvalidArguments) {
  Eigen::VectorXd a = Eigen::VectorXd::Ones(2);
  EXPECT_THROW(LogisticCost(a, 0.5, 1.0, 2), ConfigError);
  EXPECT_THROW(LogisticCost(a, 1.0, 0.0, 2), ConfigError);
  EXPECT_THROW(LogisticCost(a, 1.0, 1.0, 0), ConfigError);
}

TEST(ObjectiveStack, RejectsMixedDimensions) {
  EXPECT_THROW(ObjectiveStack({scalar_quadratic(0.0),
                               std::make_shared<QuadraticCost>(Eigen::MatrixXd::Identity(2, 2),
                                                               Eigen::Vector2d::Zero())}),
               DimensionError);
  EXPECT_THROW(ObjectiveStack({}), ConfigError);
}

TEST(ObjectiveStack, AggregateIsSumOfCosts) {
  const auto q = oracle::random_quadratics(3, 2, 51);
  const ObjectiveStack s = q.stack();
  EXPECT_TRUE(s.all_quadratic());
  const Eigen::Vector2d x(0.3, -0.7);
  double ref = 0.0;
  for (int i = 0; i < 3; ++i) ref += 0.5 * x.dot(q.a[i] * x) + q.b[i].dot(x);
  EXPECT_NEAR(s.sum_value(x), ref, 1e-14);
  EXPECT_NEAR(eval_stack(s, replicate_blocks(x, 3)), ref, 1e-14);
  EXPECT_GE(s.gamma(), 1.0);
  EXPECT_FALSE(generate_logistic_data(2, 3, 1.0, 1).all_quadratic());
}
