/*
 * Copyright 2026 The LACE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lace/ot.h"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "lace/error.h"
#include "test_util.h"

namespace lace {
namespace {

using testing::AssignmentOptimum;
using testing::CodeOf;
using testing::RandomMatrix;
using testing::Rows;

OtConfig Sharp() {
  OtConfig cfg;
  cfg.epsilon = 1e-3;
  return cfg;
}

TEST(PairwiseL2, IdenticalPointsGiveZero) {
  const CostMatrix c = PairwiseL2(Rows({{0, 0}}), Rows({{0, 0}}));
  ASSERT_EQ(c.rows(), 1);
  EXPECT_EQ(c(0, 0), 0.0);
}

TEST(PairwiseL2, ThreeFourFive) {
  EXPECT_DOUBLE_EQ(PairwiseL2(Rows({{0, 0}}), Rows({{3, 4}}))(0, 0), 5.0);
}

TEST(PairwiseL2, MatchesDoubleLoop) {
  std::mt19937_64 rng(11);
  const Matrix a = RandomMatrix(rng, 2, 3);
  const Matrix b = RandomMatrix(rng, 4, 3);
  const CostMatrix c = PairwiseL2(a, b);
  ASSERT_EQ(c.rows(), 2);
  ASSERT_EQ(c.cols(), 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(c(i, j), testing::Distance(a, i, b, j), 1e-9);
    }
  }
}

TEST(PairwiseL2, DimensionMismatchNamesBothDims) {
  try {
    PairwiseL2(Matrix::Zero(1, 3), Matrix::Zero(1, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
    EXPECT_NE(std::string(e.what()).find('5'), std::string::npos);
  }
}

TEST(Sinkhorn, SingletonIsTrivialPlan) {
  for (double c : {0.0, 1.5, 1e6}) {
    const TransportPlan q = Sinkhorn(CostMatrix(Rows({{c}})),
                                     MarginalPair::Uniform(1, 1), OtConfig{});
    EXPECT_DOUBLE_EQ(q.entries()(0, 0), 1.0);
  }
}

TEST(Sinkhorn, ZeroCostGivesProductMeasure) {
  const TransportPlan q = Sinkhorn(CostMatrix(Matrix::Zero(2, 2)),
                                   MarginalPair::Uniform(2, 2), OtConfig{});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(q.entries()(i, j), 0.25, 1e-9);
  }
}

TEST(Sinkhorn, ThreeByThreeNearAssignmentOptimum) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const CostMatrix c = PairwiseL2(RandomMatrix(rng, 3, 4), RandomMatrix(rng, 3, 4));
    const TransportPlan q = Sinkhorn(c, MarginalPair::Uniform(3, 3), Sharp());
    const double opt = AssignmentOptimum(c.entries());
    EXPECT_LE(std::abs(TransportCost(c, q) - opt), 0.02 * opt) << trial;
    EXPECT_LE(q.marginal_violation(), 1e-6);
  }
}

TEST(Sinkhorn, RejectsNonFiniteCost) {
  Matrix m = Matrix::Ones(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(CodeOf([&] { CostMatrix{m}; }), ErrorCode::kInvalidInput);
  m(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(CodeOf([&] { CostMatrix{m}; }), ErrorCode::kInvalidInput);
}

TEST(Sinkhorn, NonConvergenceCarriesViolation) {
  std::mt19937_64 rng(5);
  const CostMatrix c = PairwiseL2(RandomMatrix(rng, 5, 3), RandomMatrix(rng, 5, 3));
  OtConfig cfg = Sharp();
  cfg.max_iters = 1;
  try {
    Sinkhorn(c, MarginalPair::Uniform(5, 5), cfg);
    FAIL() << "expected non-convergence";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonConvergence);
    EXPECT_GT(e.violation(), cfg.convergence_tol);
    EXPECT_GE(e.iterations(), 1);
  }
}

TEST(Sinkhorn, NonUniformMarginalsAreMet) {
  std::mt19937_64 rng(8);
  const CostMatrix c = PairwiseL2(RandomMatrix(rng, 3, 2), RandomMatrix(rng, 4, 2));
  Vector a(3), b(4);
  a << 0.5, 0.3, 0.2;
  b << 0.1, 0.2, 0.3, 0.4;
  const TransportPlan q = Sinkhorn(c, MarginalPair(a, b), OtConfig{});
  EXPECT_LE(MarginalViolation(q.entries(), q.marginals()), 1e-6);
  EXPECT_GE(q.entries().minCoeff(), 0.0);
}

TEST(Sinkhorn, MarginalShapeMismatch) {
  EXPECT_EQ(CodeOf([] {
              Sinkhorn(CostMatrix(Matrix::Ones(2, 3)), MarginalPair::Uniform(3, 3),
                       OtConfig{});
            }),
            ErrorCode::kInvalidInput);
}

TEST(TransportCost, ZeroCost) {
  std::mt19937_64 rng(1);
  const TransportPlan q = Sinkhorn(
      PairwiseL2(RandomMatrix(rng, 3, 2), RandomMatrix(rng, 2, 2)),
      MarginalPair::Uniform(3, 2), OtConfig{});
  EXPECT_EQ(TransportCost(CostMatrix(Matrix::Zero(3, 2)), q), 0.0);
}

TEST(TransportCost, Singleton) {
  const CostMatrix c(Rows({{2}}));
  const TransportPlan q = Sinkhorn(c, MarginalPair::Uniform(1, 1), OtConfig{});
  EXPECT_DOUBLE_EQ(TransportCost(c, q), 2.0);
}

TEST(TransportCost, MatchesDoubleLoop) {
  std::mt19937_64 rng(21);
  const CostMatrix c = PairwiseL2(RandomMatrix(rng, 3, 5), RandomMatrix(rng, 4, 5));
  const TransportPlan q = Sinkhorn(c, MarginalPair::Uniform(3, 4), OtConfig{});
  double oracle = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) oracle += c(i, j) * q.entries()(i, j);
  }
  EXPECT_NEAR(TransportCost(c, q), oracle, 1e-12);
}

TEST(TransportCost, ShapeMismatch) {
  const TransportPlan q = Sinkhorn(CostMatrix(Matrix::Ones(2, 2)),
                                   MarginalPair::Uniform(2, 2), OtConfig{});
  EXPECT_EQ(CodeOf([&] { TransportCost(CostMatrix(Matrix::Ones(2, 3)), q); }),
            ErrorCode::kInvalidInput);
}

TEST(Wasserstein, IdenticalSingletons) {
  EXPECT_EQ(Wasserstein(Rows({{1, 1}}), Rows({{1, 1}}), OtConfig{}), 0.0);
}

TEST(Wasserstein, SingletonTransport) {
  EXPECT_DOUBLE_EQ(Wasserstein(Rows({{0, 0}}), Rows({{3, 4}}), OtConfig{}), 5.0);
}

TEST(Wasserstein, FourByFourNearAssignmentOptimum) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = RandomMatrix(rng, 4, 3);
    const Matrix b = RandomMatrix(rng, 4, 3);
    const double opt = AssignmentOptimum(PairwiseL2(a, b).entries());
    EXPECT_LE(std::abs(Wasserstein(a, b, Sharp()) - opt), 0.02 * opt) << trial;
  }
}

TEST(Wasserstein, Symmetric) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = RandomMatrix(rng, 3 + trial % 3, 4);
    const Matrix b = RandomMatrix(rng, 2 + trial % 4, 4);
    // Both solves stop at the marginal tolerance, so agreement is only up to
    // tol * max cost per unit of marginal error.
    const OtConfig cfg;
    const double bound = cfg.convergence_tol * PairwiseL2(a, b).entries().maxCoeff() *
                         static_cast<double>(a.rows() + b.rows());
    EXPECT_NEAR(Wasserstein(a, b, cfg), Wasserstein(b, a, cfg), bound);
  }
}

TEST(Wasserstein, SmallerEpsilonDoesNotWorsenCost) {
  std::mt19937_64 rng(13);
  OtConfig loose;
  loose.epsilon = 1e-1;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = RandomMatrix(rng, 4, 3);
    const Matrix b = RandomMatrix(rng, 5, 3);
    EXPECT_LE(Wasserstein(a, b, Sharp()), Wasserstein(a, b, loose) + 1e-6);
  }
}

TEST(Sinkhorn, PlansAreNonnegativeAndFeasible) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index m = 1 + trial % 6, n = 1 + (trial * 7) % 5;
    const CostMatrix c = PairwiseL2(RandomMatrix(rng, m, 4, 3.0), RandomMatrix(rng, n, 4, 3.0));
    const TransportPlan q = Sinkhorn(c, MarginalPair::Uniform(m, n), OtConfig{});
    EXPECT_GE(q.entries().minCoeff(), 0.0);
    EXPECT_LE(q.marginal_violation(), 1e-6);
    EXPECT_GE(TransportCost(c, q), 0.0);
  }
}

TEST(OtConfig, DefaultsAndValidation) {
  const OtConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.epsilon, 0.05);
  EXPECT_EQ(cfg.max_iters, 1000);
  EXPECT_DOUBLE_EQ(cfg.convergence_tol, 1e-6);
  OtConfig bad;
  bad.epsilon = 0.0;
  EXPECT_EQ(CodeOf([&] { bad.Validate(); }), ErrorCode::kInvalidInput);
}

}  // namespace
}  // namespace lace
