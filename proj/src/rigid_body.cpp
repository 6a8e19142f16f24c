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

#include "lgtraj/rigid_body.hpp"

#include "lgtraj/errors.hpp"

#include <stdexcept>
#include <string>

namespace lgtraj
{
  BodyParams BodyParams::make(double mass, const Mat3 &inertia, const Vec3 &gravity)
  {
    if (!(mass > 0.0))
    {
      throw std::invalid_argument("BodyParams: mass must be positive");
    }
    if ((inertia - inertia.transpose()).norm() > 1e-12 * std::max(1.0, inertia.norm()))
    {
      throw std::invalid_argument("BodyParams: inertia must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
    if (eig.eigenvalues().minCoeff() <= 0.0)
    {
      throw std::invalid_argument("BodyParams: inertia must be positive definite");
    }
    BodyParams out;
    out.mass = mass;
    out.inertia = inertia;
    out.nonstandard_inertia = lgtraj::nonstandard_inertia(inertia);
    out.gravity = gravity;
    return out;
  }

  Vec3 BodyState::angular_velocity(double dt) const
  {
    return 0.5 * vee_skew(F.matrix()) / dt;
  }

  Mat3 nonstandard_inertia(const Mat3 &inertia)
  {
    // I_b = tr(J) I - J  with  tr(I_b) = 2 tr(J).
    return 0.5 * inertia.trace() * Mat3::Identity() - inertia;
  }

  Vec3 discrete_momentum(const Rotation &F, const Mat3 &J)
  {
    return vee_skew(F.matrix() * J);
  }

  Mat3 discrete_momentum_jacobian(const Rotation &F, const Mat3 &J)
  {
    Mat3 out;
    for (int j = 0; j < 3; ++j)
    {
      out.col(j) = vee_skew(F.matrix() * hat(Vec3::Unit(j)) * J);
    }
    return out;
  }

  Vec3 rot_dyn_residual(const Rotation &F_k, const Rotation &F_next, const Vec3 &tau, double dt,
                        const Mat3 &J)
  {
    return vee_skew(F_next.matrix() * J) - vee_skew(J * F_k.matrix()) - tau * dt * dt;
  }

  Rotation solve_next_F(const Rotation &F_k, const Vec3 &tau, double dt, const Mat3 &J, double tol,
                        int max_iterations)
  {
    const Vec3 target = vee_skew(J * F_k.matrix()) + tau * dt * dt;
    Rotation F = F_k;
    Vec3 r = discrete_momentum(F, J) - target;
    for (int it = 0; it < max_iterations && r.norm() > tol; ++it)
    {
      const Vec3 delta = discrete_momentum_jacobian(F, J).partialPivLu().solve(-r);
      F = F.retract(delta);
      r = discrete_momentum(F, J) - target;
    }
    if (!(r.norm() <= tol))
    {
      throw SolverError("solve_next_F: Newton iteration did not converge", r.norm());
    }
    // One polishing step: tol is absolute, while discrete momenta are O(dt |J| |omega|).
    const Rotation polished = F.retract(discrete_momentum_jacobian(F, J).partialPivLu().solve(-r));
    if ((discrete_momentum(polished, J) - target).norm() <= r.norm())
    {
      return polished;
    }
    return F;
  }

  Vec3 trans_dyn_step(const Vec3 &v_k, const BodyParams &params, double dt, const Vec3 &thrust_world)
  {
    return v_k + params.gravity * dt + thrust_world * dt / params.mass;
  }

  std::pair<Vec3, Vec3> kin_residuals(const BodyState &state_k, const BodyState &state_next, double dt)
  {
    const Rotation Y = state_next.R.inverse() * state_k.R * state_k.F;
    return {Y.log(), state_next.p - state_k.p - state_k.v * dt};
  }

  Trajectory simulate(const BodyParams &params, const BodyState &initial,
                      const std::vector<ControlInput> &inputs, double dt, int N, double tol)
  {
    if (static_cast<int>(inputs.size()) < N)
    {
      throw std::invalid_argument("simulate: fewer inputs than steps");
    }
    Trajectory traj;
    traj.dt = dt;
    traj.inputs.assign(inputs.begin(), inputs.begin() + N);
    traj.states.reserve(N + 1);
    traj.states.push_back({initial});
    for (int k = 0; k < N; ++k)
    {
      const BodyState &cur = traj.states.back().front();
      BodyState next;
      try
      {
        next.F = solve_next_F(cur.F, inputs[k].tau, dt, params.nonstandard_inertia, tol);
      }
      catch (const SolverError &e)
      {
        throw SolverError("simulate: implicit step " + std::to_string(k) + " failed", e.last_residual(), k);
      }
      next.R = cur.R * cur.F;
      next.p = cur.p + cur.v * dt;
      next.v = trans_dyn_step(cur.v, params, dt, next.R * (Vec3::UnitZ() * inputs[k].u_z));
      traj.states.push_back({next});
    }
    return traj;
  }

  Vec3 spatial_angular_momentum(const BodyState &state, const Mat3 &J, double dt)
  {
    return state.R * discrete_momentum(state.F, J) / dt;
  }

} // namespace lgtraj
