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

#include "lgtraj/check.hpp"

#include "lgtraj/costs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lgtraj
{
  namespace
  {
    Vec3 random_vec(std::mt19937_64 &rng, double scale)
    {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      return scale * Vec3(u(rng), u(rng), u(rng));
    }

    /// Rotation with angle below max_angle.
    Rotation random_rotation(std::mt19937_64 &rng, double max_angle = 2.5)
    {
      std::normal_distribution<double> n(0.0, 1.0);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      Vec3 axis(n(rng), n(rng), n(rng));
      return Rotation::exp(max_angle * u(rng) * axis.normalized());
    }

    Eigen::VectorXd random_vector(std::mt19937_64 &rng, int dim, double scale)
    {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Eigen::VectorXd v(dim);
      for (int i = 0; i < dim; ++i)
      {
        v[i] = scale * u(rng);
      }
      return v;
    }

    Mat3 random_spd(std::mt19937_64 &rng)
    {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Mat3 A;
      for (int i = 0; i < 9; ++i)
      {
        A(i / 3, i % 3) = u(rng);
      }
      return A * A.transpose() + Mat3::Identity();
    }

    Mat3 random_inertia(std::mt19937_64 &rng)
    {
      std::uniform_real_distribution<double> u(0.5, 2.0);
      const Mat3 Q = random_rotation(rng, 3.0).matrix();
      const Vec3 d(u(rng), u(rng), u(rng));
      return nonstandard_inertia(Q * d.asDiagonal() * Q.transpose());
    }

    void randomize(const VariableLayout &layout, Point &x, std::mt19937_64 &rng)
    {
      for (int i = 0; i < layout.num_slots(); ++i)
      {
        const Slot &s = layout.slot(i);
        if (s.kind == SlotKind::Rotation)
        {
          x.rot[i] = random_rotation(rng);
        }
        else
        {
          x.vec[i] = random_vector(rng, s.dim, 1.0);
        }
      }
    }
  } // namespace

  const std::vector<std::string> &check_families()
  {
    static const std::vector<std::string> families = {
        "rot_kinematics", "trans_kinematics", "rot_dynamics", "trans_dynamics", "thrust",
        "pivot", "axis", "pivot_wrench", "axis_wrench", "actuation",
        "initial_rotation", "initial_vector", "obstacle", "box", "cost_rotation", "cost_vector"};
    return families;
  }

  BlockSample sample_block(const std::string &family, std::mt19937_64 &rng)
  {
    BlockSample s;
    VariableLayout &L = s.layout;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double dt = 0.01 + 0.1 * unit(rng);
    const bool grounded = unit(rng) < 0.3;
    auto ground = [&]()
    {
      GroundPose g;
      g.R = random_rotation(rng);
      g.p = random_vec(rng, 1.0);
      return g;
    };

    if (family == "rot_kinematics")
    {
      const int R = L.add_rotation(0, 0), F = L.add_rotation(0, 0), Rn = L.add_rotation(1, 0);
      s.block = std::make_shared<RotKinematicsBlock>(L, R, F, Rn);
    }
    else if (family == "trans_kinematics")
    {
      const int p = L.add_euclidean(3, 0, 0), v = L.add_euclidean(3, 0, 0), pn = L.add_euclidean(3, 1, 0);
      s.block = std::make_shared<TransKinematicsBlock>(L, p, v, pn, dt);
    }
    else if (family == "rot_dynamics")
    {
      const int F = L.add_rotation(0, 0), Fn = L.add_rotation(1, 0), u = L.add_euclidean(4, 0, -1);
      Eigen::MatrixXd map = Eigen::MatrixXd::Zero(3, 4);
      map.leftCols<3>().setIdentity();
      s.block = std::make_shared<RotDynamicsBlock>(L, F, Fn, u, map, random_inertia(rng), dt);
    }
    else if (family == "trans_dynamics")
    {
      const int v = L.add_euclidean(3, 0, 0), vn = L.add_euclidean(3, 1, 0);
      s.block = std::make_shared<TransDynamicsBlock>(L, v, vn, 0.5 + unit(rng), Vec3(0.0, 0.0, -9.81), dt);
    }
    else if (family == "thrust")
    {
      const int R = L.add_rotation(1, 0), u = L.add_euclidean(4, 0, -1);
      s.block = std::make_shared<ThrustBlock>(L, R, u, 3, dt);
    }
    else if (family == "pivot")
    {
      const int Ra = grounded ? -1 : L.add_rotation(0, 0);
      const int pa = grounded ? -1 : L.add_euclidean(3, 0, 0);
      const int Rb = L.add_rotation(0, 1), pb = L.add_euclidean(3, 0, 1);
      s.block = std::make_shared<PivotBlock>(L, Ra, pa, Rb, pb, random_vec(rng, 0.5), random_vec(rng, 0.5),
                                             grounded ? ground() : GroundPose{});
    }
    else if (family == "axis")
    {
      const int Ra = grounded ? -1 : L.add_rotation(0, 0);
      const int Rb = L.add_rotation(0, 1);
      s.block = std::make_shared<AxisBlock>(L, Ra, Rb, AxisFrame::about(random_vec(rng, 1.0)),
                                            grounded ? ground() : GroundPose{});
    }
    else if (family == "pivot_wrench")
    {
      const int Ra = grounded ? -1 : L.add_rotation(1, 0);
      const int Rb = L.add_rotation(1, 1), u = L.add_euclidean(6, 0, -1);
      s.block = std::make_shared<PivotWrenchBlock>(L, Ra, Rb, u, 1, random_vec(rng, 0.5), random_vec(rng, 0.5), dt);
    }
    else if (family == "axis_wrench")
    {
      const int Ra = grounded ? -1 : L.add_rotation(1, 0);
      const int Rb = L.add_rotation(1, 1), u = L.add_euclidean(6, 0, -1);
      s.block = std::make_shared<AxisWrenchBlock>(L, Ra, Rb, u, 4, AxisFrame::about(random_vec(rng, 1.0)), dt,
                                                  grounded ? ground() : GroundPose{});
    }
    else if (family == "actuation")
    {
      const int u = L.add_euclidean(6, 0, -1);
      s.block = std::make_shared<JointTorqueBlock>(L, u, 0, !grounded, random_vec(rng, 1.0).normalized(),
                                                   random_vec(rng, 1.0).normalized(), dt);
    }
    else if (family == "initial_rotation")
    {
      const int R = L.add_rotation(0, 0);
      s.block = std::make_shared<InitialRotationBlock>(L, R, random_rotation(rng));
    }
    else if (family == "initial_vector")
    {
      const int p = L.add_euclidean(3, 0, 0);
      s.block = std::make_shared<InitialVectorBlock>(L, p, random_vector(rng, 3, 1.0));
    }
    else if (family == "obstacle")
    {
      const int p = L.add_euclidean(3, 0, 0);
      s.block = std::make_shared<ObstacleBlock>(L, p, random_vector(rng, 2, 1.0), 0.1 + 0.5 * unit(rng));
    }
    else if (family == "box")
    {
      const int u = L.add_euclidean(4, 0, -1);
      const Eigen::VectorXd lo = random_vector(rng, 4, 1.0) - Eigen::VectorXd::Constant(4, 2.0);
      const Eigen::VectorXd hi = lo + Eigen::VectorXd::Constant(4, 4.0);
      s.block = std::make_shared<BoxBlock>(L, u, lo, hi);
    }
    else if (family == "cost_rotation")
    {
      const int R = L.add_rotation(0, 0);
      s.block = std::make_shared<ChordalCostBlock>(L, R, random_rotation(rng, 3.1), random_spd(rng));
    }
    else if (family == "cost_vector")
    {
      const int p = L.add_euclidean(3, 0, 0);
      s.block = std::make_shared<QuadCostBlock>(L, p, random_vector(rng, 3, 1.0), random_spd(rng));
    }
    else
    {
      throw std::invalid_argument("unknown block family '" + family + "'");
    }
    s.x = Point::zeros(L);
    randomize(L, s.x, rng);
    return s;
  }

  std::vector<FamilyReport> run_derivative_check(const CheckOptions &options)
  {
    const std::vector<std::string> &families = options.families ? *options.families : check_families();
    std::vector<FamilyReport> out;
    std::mt19937_64 rng(options.seed);
    for (const std::string &family : families)
    {
      FamilyReport rep;
      rep.family = family;
      for (int i = 0; i < options.states; ++i)
      {
        BlockSample sample = sample_block(family, rng);
        BlockPtr block = sample.block;
        if (options.inject_fault)
        {
          block = std::make_shared<FaultInjectedBlock>(block, 0, 0, 1e-3);
        }
        const int trials = block->local_dim() + options.directions;
        const FdCheckResult r = fd_check(*block, sample.x, trials, rng);
        rep.gradient_error = std::max(rep.gradient_error, r.gradient_error);
        rep.hessian_error = std::max(rep.hessian_error, r.hessian_error);
        ++rep.states;
      }
      rep.pass = rep.gradient_error <= options.gradient_threshold && rep.hessian_error <= options.hessian_threshold;
      out.push_back(rep);
    }
    return out;
  }

} // namespace lgtraj
