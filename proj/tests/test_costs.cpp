/*
 Copyright 2026 lgtraj contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "lgtraj/costs.hpp"
#include "lgtraj/nlp.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <random>

using namespace lgtraj;
using namespace lgtraj::testing;

namespace
{
  Mat3 sqrtm_spd(const Mat3 &W)
  {
    Eigen::SelfAdjointEigenSolver<Mat3> es(W);
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  }
} // namespace

TEST(ChordalCost, ZeroAtTarget)
{
  std::mt19937_64 rng(31);
  const Rotation R = random_rotation(rng);
  EXPECT_NEAR(chordal_cost(R, R, random_spd(rng)), 0.0, 1e-28);
}

TEST(ChordalCost, HalfTurnAboutX)
{
  std::mt19937_64 rng(32);
  const Rotation Rd = random_rotation(rng);
  const Rotation R = exp_so3(M_PI * Vec3::UnitX()) * Rd;
  EXPECT_NEAR(chordal_cost(R, Rd, Mat3::Identity()), 4.0, 1e-14);
}

TEST(ChordalCost, FrobeniusIdentity)
{
  std::mt19937_64 rng(33);
  for (int i = 0; i < 100; ++i)
  {
    const Rotation R = random_rotation(rng), Rd = random_rotation(rng);
    const Mat3 W = random_spd(rng);
    const Mat3 A = R.matrix() * Rd.matrix().transpose() - Mat3::Identity();
    EXPECT_NEAR(chordal_cost(R, Rd, W), 0.5 * (A * sqrtm_spd(W)).squaredNorm(), 1e-13);
    EXPECT_GE(chordal_cost(R, Rd, W), 0.0);
  }
}

TEST(ChordalCost, IsotropicWeightIsSymmetric)
{
  std::mt19937_64 rng(34);
  for (int i = 0; i < 100; ++i)
  {
    const Rotation R = random_rotation(rng), Rd = random_rotation(rng);
    const Mat3 W = 2.5 * Mat3::Identity();
    EXPECT_NEAR(chordal_cost(R, Rd, W), chordal_cost(Rd, R, W), 1e-13);
  }
}

TEST(ChordalCostExpansion, GradientVanishesAtTarget)
{
  std::mt19937_64 rng(35);
  for (int i = 0; i < 20; ++i)
  {
    const Rotation R = random_rotation(rng);
    const Expansion e = chordal_cost_expansion(R, R, random_spd(rng));
    EXPECT_LE(e.jacobian.norm(), 1e-14);
    // Strict minimum: positive definite Hessian.
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(e.hessians[0]).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(ChordalCostExpansion, MatchesFiniteDifferencesAlongRetraction)
{
  std::mt19937_64 rng(36);
  for (int i = 0; i < 100; ++i)
  {
    const Rotation R = random_rotation(rng), Rd = random_rotation(rng);
    const Mat3 W = random_spd(rng);
    const CurveFn f = [&](const Eigen::VectorXd &d)
    { return Eigen::VectorXd::Constant(1, chordal_cost(R.retract(Vec3(d)), Rd, W)); };
    const Expansion e = chordal_cost_expansion(R, Rd, W);
    const Eigen::VectorXd d = random_unit(rng, 3);
    EXPECT_LE(rel_err(e.first_order(d), fd_first(f, d)), 1e-6);
    EXPECT_LE(rel_err(2.0 * e.second_order(d), fd_second(f, d)), 1e-4);
    EXPECT_LE((e.hessians[0] - e.hessians[0].transpose()).norm(), 1e-12);
  }
}

TEST(QuadCost, ArithmeticExamples)
{
  const Expansion at = quad_cost(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3), Mat3::Identity());
  EXPECT_EQ(at.value[0], 0.0);
  EXPECT_EQ(at.jacobian.norm(), 0.0);

  const Expansion e = quad_cost(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d::Zero(), 2.0 * Mat3::Identity());
  EXPECT_DOUBLE_EQ(e.value[0], 1.0);
  EXPECT_LE((e.jacobian.row(0).transpose() - Eigen::Vector3d(2, 0, 0)).norm(), 0.0);
  EXPECT_LE((e.hessians[0] - 2.0 * Eigen::MatrixXd::Identity(3, 3)).norm(), 0.0);
}

TEST(QuadCost, MatchesFiniteDifferences)
{
  std::mt19937_64 rng(37);
  for (int i = 0; i < 100; ++i)
  {
    const Eigen::VectorXd p = random_vec(rng), pd = random_vec(rng);
    const Mat3 W = random_spd(rng);
    const CurveFn f = [&](const Eigen::VectorXd &d)
    { return Eigen::VectorXd::Constant(1, 0.5 * (p + d - pd).dot(W * (p + d - pd))); };
    const Expansion e = quad_cost(p, pd, W);
    EXPECT_NEAR(e.value[0], f(Eigen::VectorXd::Zero(3))[0], 1e-14);
    const Eigen::VectorXd d = random_unit(rng, 3);
    EXPECT_LE(rel_err(e.first_order(d), fd_first(f, d)), 1e-6);
    EXPECT_LE(rel_err(2.0 * e.second_order(d), fd_second(f, d)), 1e-4);
  }
}

TEST(CostBlocks, RejectMismatchedSlots)
{
  VariableLayout layout;
  const int R = layout.add_rotation(0, 0);
  const int p = layout.add_euclidean(3, 0, 0);
  EXPECT_THROW(ChordalCostBlock(layout, p, Rotation(), Mat3::Identity()), std::invalid_argument);
  EXPECT_THROW(QuadCostBlock(layout, R, Eigen::Vector3d::Zero(), Mat3::Identity()), std::invalid_argument);
  EXPECT_THROW(QuadCostBlock(layout, p, Eigen::Vector2d::Zero(), Mat3::Identity()), std::invalid_argument);
}

TEST(CostAssembly, AdditiveAndOrderIndependent)
{
  std::mt19937_64 rng(38);
  VariableLayout layout;
  std::vector<int> rots, vecs;
  for (int k = 0; k < 4; ++k)
  {
    rots.push_back(layout.add_rotation(k, 0));
    vecs.push_back(layout.add_euclidean(3, k, 0));
  }
  std::vector<BlockPtr> blocks;
  for (int k = 0; k < 4; ++k)
  {
    blocks.push_back(std::make_shared<ChordalCostBlock>(layout, rots[k], random_rotation(rng), random_spd(rng)));
    blocks.push_back(std::make_shared<QuadCostBlock>(layout, vecs[k], Eigen::VectorXd(random_vec(rng)),
                                                     Eigen::MatrixXd(random_spd(rng))));
  }
  Point x = Point::zeros(layout);
  for (int k = 0; k < 4; ++k)
  {
    x.rot[rots[k]] = random_rotation(rng);
    x.vec[vecs[k]] = random_vec(rng);
  }

  double direct = 0.0;
  for (const auto &b : blocks)
  {
    direct += b->value(x)[0];
  }

  NLPProblem forward(layout), backward(layout);
  for (const auto &b : blocks)
  {
    forward.add_objective(b);
  }
  std::reverse(blocks.begin(), blocks.end());
  for (const auto &b : blocks)
  {
    backward.add_objective(b);
  }
  const Evaluation a = evaluate(forward, x), b = evaluate(backward, x);
  EXPECT_NEAR(a.f, direct, 1e-12);
  EXPECT_NEAR(b.f, direct, 1e-12);
  EXPECT_LE((a.grad_f - b.grad_f).norm(), 1e-12);
}
