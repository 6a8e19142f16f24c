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

#include "lgtraj/lie.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace lgtraj;

namespace
{
  Vec3 random_vec(std::mt19937_64 &rng, double scale = 1.0)
  {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return scale * Vec3(u(rng), u(rng), u(rng));
  }

  Rotation random_rotation(std::mt19937_64 &rng)
  {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, M_PI);
    return Rotation::exp(u(rng) * Vec3(n(rng), n(rng), n(rng)).normalized());
  }

  Mat3 series_exp(const Mat3 &A)
  {
    Mat3 out = Mat3::Identity();
    Mat3 term = Mat3::Identity();
    for (int k = 1; k <= 30; ++k)
    {
      term = term * A / k;
      out += term;
    }
    return out;
  }

  /// Mercator series of log(R), valid near the identity.
  Vec3 series_log(const Mat3 &R)
  {
    const Mat3 X = R - Mat3::Identity();
    Mat3 out = Mat3::Zero();
    Mat3 term = Mat3::Identity();
    for (int k = 1; k <= 60; ++k)
    {
      term = term * X;
      out += (k % 2 ? 1.0 : -1.0) * term / k;
    }
    return Vec3(out(2, 1), out(0, 2), out(1, 0));
  }

  bool is_rotation(const Rotation &R)
  {
    return R.orthonormality_defect() <= 1e-10 && std::abs(R.determinant() - 1.0) <= 1e-10;
  }
} // namespace

TEST(Hat, ZeroAndBasis)
{
  EXPECT_TRUE(hat(Vec3::Zero()).isZero(0.0));
  Mat3 expected;
  expected << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_TRUE(hat(Vec3(1, 0, 0)).isApprox(expected, 0.0));
}

TEST(Hat, MatchesComponentwiseCrossProduct)
{
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i)
  {
    const Vec3 v = random_vec(rng, 5.0), w = random_vec(rng, 5.0);
    const Vec3 cross(v[1] * w[2] - v[2] * w[1], v[2] * w[0] - v[0] * w[2], v[0] * w[1] - v[1] * w[0]);
    EXPECT_LE((hat(v) * w - cross).norm(), 1e-14);
    EXPECT_TRUE((hat(v) + hat(v).transpose()).isZero(0.0));
  }
}

TEST(Vee, RoundTripAndRejectsNonSkew)
{
  EXPECT_TRUE(vee(Mat3::Zero()).isZero(0.0));
  EXPECT_EQ(vee(hat(Vec3(1, 2, 3))), Vec3(1, 2, 3));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i)
  {
    const Vec3 v = random_vec(rng, 10.0);
    EXPECT_EQ(vee(hat(v)), v);
    Mat3 M = hat(v);
    EXPECT_LE((hat(vee(M)) - M).norm(), 1e-12);
  }
  Mat3 bad = Mat3::Zero();
  bad(0, 0) = 0.5; // ||M + M^T||_F = 1
  EXPECT_THROW(vee(bad), std::invalid_argument);
}

TEST(ExpSo3, KnownValues)
{
  EXPECT_TRUE(exp_so3(Vec3::Zero()).matrix().isIdentity(0.0));
  Mat3 expected;
  expected << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_LE((exp_so3(Vec3(M_PI / 2, 0, 0)).matrix() - expected).norm(), 1e-15);
}

TEST(ExpSo3, MatchesMatrixSeries)
{
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i)
  {
    const Vec3 phi = random_vec(rng, 2.0);
    EXPECT_LE((exp_so3(phi).matrix() - series_exp(hat(phi))).norm(), 1e-12);
  }
  // Small-angle branch.
  const Vec3 tiny(3e-5, -2e-5, 1e-5);
  EXPECT_LE((exp_so3(tiny).matrix() - series_exp(hat(tiny))).norm(), 1e-15);
}

TEST(ExpSo3, OutputIsAlwaysARotation)
{
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10000; ++i)
  {
    ASSERT_TRUE(is_rotation(exp_so3(random_vec(rng, 10.0 / std::sqrt(3.0)))));
  }
}

TEST(LogSo3, KnownValues)
{
  EXPECT_TRUE(log_so3(Rotation()).isZero(0.0));
  const Vec3 phi(0.3, -0.2, 0.1);
  EXPECT_LE((log_so3(exp_so3(phi)) - phi).norm(), 1e-14);
  EXPECT_LE((log_so3(exp_so3(phi)) - series_log(exp_so3(phi).matrix())).norm(), 1e-13);

  Mat3 D = Vec3(1, -1, -1).asDiagonal();
  const Vec3 w = log_so3(Rotation::from_matrix(D));
  EXPECT_NEAR(std::abs(w[0]), M_PI, 1e-12);
  EXPECT_NEAR(w[1], 0.0, 1e-12);
  EXPECT_NEAR(w[2], 0.0, 1e-12);
  EXPECT_LE((exp_so3(w).matrix() - D).norm(), 1e-9);
}

TEST(LogSo3, InvertsExpBelowCutLocus)
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, M_PI - 1e-3);
  for (int i = 0; i < 2000; ++i)
  {
    const Vec3 phi = u(rng) * Vec3(n(rng), n(rng), n(rng)).normalized();
    ASSERT_LE((log_so3(exp_so3(phi)) - phi).norm(), 1e-10) << phi.transpose();
  }
}

TEST(LogSo3, ExpOfLogIsIdentityIncludingHalfTurns)
{
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1e-7, 1e-7);
  for (int i = 0; i < 2000; ++i)
  {
    const Vec3 axis = Vec3(n(rng), n(rng), n(rng)).normalized();
    const double angle = i % 2 ? M_PI + u(rng) : std::abs(n(rng)) * 2.0;
    const Rotation R = exp_so3(angle * axis);
    const Vec3 w = log_so3(R);
    ASSERT_LE(w.norm(), M_PI + 1e-12);
    ASSERT_LE((exp_so3(w).matrix() - R.matrix()).norm(), 1e-9) << angle;
  }
}

TEST(Rotation, RepairsDriftAfterManyRetractions)
{
  std::mt19937_64 rng(7);
  Rotation R;
  for (int i = 0; i < 10000; ++i)
  {
    R = R.retract(random_vec(rng, 0.5));
  }
  EXPECT_TRUE(is_rotation(R));
  EXPECT_THROW(Rotation::from_matrix(2.0 * Mat3::Identity()), std::invalid_argument);
}

TEST(AdjointRot, ConjugationAndHomomorphism)
{
  std::mt19937_64 rng(8);
  const Vec3 xi0(0.4, -1.0, 2.0);
  EXPECT_EQ(adjoint_rot(Rotation(), xi0), xi0);
  for (int i = 0; i < 100; ++i)
  {
    const Rotation R1 = random_rotation(rng), R2 = random_rotation(rng);
    const Vec3 xi = random_vec(rng, 3.0);
    const Vec3 conj = vee(R1.matrix() * hat(xi) * R1.matrix().transpose());
    EXPECT_LE((adjoint_rot(R1, xi) - conj).norm(), 1e-12);
    EXPECT_LE((adjoint_rot(R1 * R2, xi) - adjoint_rot(R1, adjoint_rot(R2, xi))).norm(), 1e-12);
  }
}

TEST(Bch2, FormulaValues)
{
  const Vec3 a(0.3, 0.1, -0.2);
  EXPECT_EQ(bch2(a, Vec3::Zero()), a);
  const double e = 1e-3;
  EXPECT_LE((bch2(Vec3(e, 0, 0), Vec3(0, e, 0)) - Vec3(e, e, e * e / 2)).norm(), 1e-18);
}

TEST(Bch2, CubicRemainderOnHalvingSequence)
{
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial)
  {
    const Vec3 da = random_vec(rng).normalized(), db = random_vec(rng).normalized();
    double prev = 0.0;
    for (int k = 2; k <= 6; ++k)
    {
      const double s = std::ldexp(1.0, -k);
      const Vec3 a = s * da, b = s * db;
      const double err = (log_so3(exp_so3(a) * exp_so3(b)) - bch2(a, b)).norm();
      EXPECT_LE(err, 1.0 * std::pow(2.0 * s, 3));
      if (k > 2 && err > 1e-13)
      {
        const double ratio = prev / err;
        EXPECT_GT(ratio, 8.0 * 0.8) << "k=" << k;
        EXPECT_LT(ratio, 8.0 * 1.2) << "k=" << k;
      }
      prev = err;
    }
  }
}

TEST(ChainSecondOrder, SingleAndIdentityChains)
{
  const Rotation I;
  std::vector<Rotation> one{exp_so3(Vec3(0.1, 0.2, 0.3))};
  const ChainExpansion e1 = chain_second_order(one);
  ASSERT_EQ(e1.gradient_maps.size(), 1u);
  EXPECT_TRUE(e1.gradient_maps[0].isIdentity(0.0));
  EXPECT_TRUE(e1.bracket_pairs.empty());

  std::vector<Rotation> two{I, I};
  const ChainExpansion e2 = chain_second_order(two);
  const Vec3 x1(1, 0, 0), x2(0, 2, 0);
  const std::vector<Vec3> d{x1, x2};
  EXPECT_EQ(e2.first_order(d), x1 + x2);
  EXPECT_LE((e2.second_order(d) - 0.5 * x1.cross(x2)).norm(), 1e-15);

  const std::vector<Vec3> collinear{x1, 3.0 * x1};
  EXPECT_TRUE(e2.second_order(collinear).isZero(0.0));
  EXPECT_THROW(chain_second_order(std::vector<Rotation>{}), std::invalid_argument);
}

TEST(ChainSecondOrder, MatchesSecondDifferenceInT)
{
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial)
  {
    std::vector<Rotation> X{random_rotation(rng), random_rotation(rng), random_rotation(rng)};
    std::vector<Vec3> xi{random_vec(rng), random_vec(rng), random_vec(rng)};
    const ChainExpansion e = chain_second_order(X);
    const Rotation Ybar_inv = (X[0] * X[1] * X[2]).inverse();
    auto f = [&](double t)
    {
      Rotation Y = Ybar_inv;
      for (int i = 0; i < 3; ++i)
      {
        Y = Y * X[i] * exp_so3(t * xi[i]);
      }
      return log_so3(Y);
    };
    const Vec3 g = e.first_order(xi);
    const Vec3 H = e.second_order(xi);
    double prev = 0.0;
    for (int k = 0; k < 4; ++k)
    {
      const double h = 1e-2 * std::ldexp(1.0, -k);
      // f(h) = h g + h^2 H + O(h^3)
      const Vec3 second = (f(2 * h) - 2.0 * f(h)) / (2.0 * h * h);
      const double err = (second - H).norm();
      EXPECT_LE(err, 50.0 * h);
      EXPECT_LE(((f(h) - f(-h)) / (2 * h) - g).norm(), 50.0 * h * h);
      if (k > 0)
      {
        EXPECT_LT(err, 0.75 * prev); // first-order decay of the O(h) remainder
      }
      prev = err;
    }
  }
}
