// Copyright 2026 The stripfold Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "stripfold/cmaes.hpp"

namespace stripfold {
namespace {

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

double rosenbrock(const Eigen::VectorXd& x) {
  double f = 0.0;
  for (int i = 0; i + 1 < x.size(); ++i) {
    f += 100 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1 - x[i], 2);
  }
  return f;
}

TEST(CmaesTest, TenDimensionalSphere) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(10, 1.0);
  const MinimizeResult r = cmaes_minimize(sphere, x0, 0.5, 10, 42, 10000, 1e-8);
  EXPECT_LT(r.cost, 1e-8);
  EXPECT_LE(r.evaluations, 10000);
  EXPECT_LT(r.x.norm(), 1e-4);
}

TEST(CmaesTest, SphereAcrossSeeds) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(10, -2.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MinimizeResult r = cmaes_minimize(sphere, x0, 1.0, 16, seed, 10000, 1e-8);
    EXPECT_LT(r.cost, 1e-8) << "seed " << seed;
  }
}

TEST(CmaesTest, AdaptsToCurvedValley) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  const MinimizeResult r = cmaes_minimize(rosenbrock, x0, 0.3, 8, 7, 40000, 1e-10);
  EXPECT_LT(r.cost, 1e-10);
  EXPECT_LT((r.x - Eigen::VectorXd::Ones(4)).norm(), 1e-4);
}

TEST(CmaesTest, SameSeedSameSequence) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(6, 0.7);
  Cmaes a(x0, 0.4, 8, 99), b(x0, 0.4, 8, 99);
  for (int g = 0; g < 20; ++g) {
    const auto& pa = a.ask();
    const auto& pb = b.ask();
    std::vector<double> ca, cb;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      ASSERT_EQ(pa[i], pb[i]);
      ca.push_back(sphere(pa[i]));
      cb.push_back(sphere(pb[i]));
    }
    a.tell(ca);
    b.tell(cb);
  }
  EXPECT_EQ(a.mean(), b.mean());
  EXPECT_EQ(a.sigma(), b.sigma());
}

TEST(CmaesTest, StateStaysWellFormed) {
  Cmaes es(Eigen::VectorXd::Constant(5, 3.0), 1.0, 10, 3);
  EXPECT_EQ(es.mu(), 5);
  double best = es.best_cost();
  for (int g = 0; g < 30; ++g) {
    const auto& pop = es.ask();
    ASSERT_EQ(static_cast<int>(pop.size()), 10);
    std::vector<double> costs;
    for (const auto& x : pop) costs.push_back(rosenbrock(x));
    es.tell(costs);
    EXPECT_LE(es.best_cost(), best);
    best = es.best_cost();
    const Eigen::MatrixXd& C = es.covariance();
    EXPECT_LT((C - C.transpose()).norm(), 1e-12 * C.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_GT(es.sigma(), 0.0);
  }
  EXPECT_EQ(es.generation(), 30);
  EXPECT_EQ(rosenbrock(es.best_x()), es.best_cost());
}

TEST(CmaesTest, RejectsBadArguments) {
  EXPECT_THROW(Cmaes(Eigen::VectorXd::Zero(3), 1.0, 3, 1), std::invalid_argument);
  EXPECT_THROW(Cmaes(Eigen::VectorXd::Zero(3), 0.0, 8, 1), std::invalid_argument);
  Cmaes es(Eigen::VectorXd::Zero(3), 1.0, 8, 1);
  es.ask();
  EXPECT_THROW(es.tell(std::vector<double>(7, 0.0)), std::invalid_argument);
}

}  // namespace
}  // namespace stripfold
