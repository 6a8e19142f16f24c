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

#ifndef LGTRAJ_RIGID_BODY_HPP
#define LGTRAJ_RIGID_BODY_HPP

#include "lgtraj/lie.hpp"

#include <utility>
#include <vector>

namespace lgtraj
{
  /// Mass properties of one rigid body.
  ///
  /// `inertia` is the standard inertia tensor I_b; `nonstandard_inertia` is the
  /// matrix J appearing in the discrete kinetic energy, I_b = tr(J) I - J.
  struct BodyParams
  {
    double mass = 1.0;
    Mat3 inertia = Mat3::Identity();
    Mat3 nonstandard_inertia = 0.5 * Mat3::Identity();
    Vec3 gravity = Vec3(0.0, 0.0, -9.81);

    /// Validates mass > 0 and inertia symmetric positive definite; throws
    /// std::invalid_argument otherwise.
    static BodyParams make(double mass, const Mat3 &inertia, const Vec3 &gravity);
  };

  /// Configuration (R, p) plus discrete velocities (F, v) of one body at one step.
  struct BodyState
  {
    Rotation R;
    Vec3 p = Vec3::Zero();
    Rotation F;
    Vec3 v = Vec3::Zero();

    /// Mid-point body angular velocity, (F - I)^vee / dt using the skew part.
    Vec3 angular_velocity(double dt) const;
  };

  struct ControlInput
  {
    Vec3 tau = Vec3::Zero();
    double u_z = 0.0;
  };

  /// states[k][b] for k = 0..N and bodies b; inputs[k] for k = 0..N-1.
  struct Trajectory
  {
    double dt = 0.05;
    std::vector<std::vector<BodyState>> states;
    std::vector<ControlInput> inputs;

    int horizon() const { return static_cast<int>(inputs.size()); }
    int num_bodies() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  };

  Mat3 nonstandard_inertia(const Mat3 &inertia);

  /// vee(F_next J - J F_next^T - (J F_k - F_k^T J)) - tau dt^2.
  Vec3 rot_dyn_residual(const Rotation &F_k, const Rotation &F_next, const Vec3 &tau, double dt,
                        const Mat3 &J);

  /// Body momentum-like vector vee(F J - J F^T).
  Vec3 discrete_momentum(const Rotation &F, const Mat3 &J);

  /// Linear map xi -> d/dt vee(F e^{t xi} J - J e^{-t xi} F^T) at t = 0.
  Mat3 discrete_momentum_jacobian(const Rotation &F, const Mat3 &J);

  /// Solves the implicit rotational update for F_{k+1} by Newton iteration on
  /// F_{k+1} = F_guess exp(delta). Throws SolverError (carrying the last
  /// residual norm) after `max_iterations` without reaching `tol`. One extra
  /// correction is applied once `tol` is met.
  Rotation solve_next_F(const Rotation &F_k, const Vec3 &tau, double dt, const Mat3 &J,
                        double tol = 1e-12, int max_iterations = 50);

  /// v_k + g dt + thrust_world dt / m.
  Vec3 trans_dyn_step(const Vec3 &v_k, const BodyParams &params, double dt, const Vec3 &thrust_world);

  /// (log(R_next^T R_k F_k), p_next - p_k - v_k dt).
  std::pair<Vec3, Vec3> kin_residuals(const BodyState &state_k, const BodyState &state_next, double dt);

  /// Forward simulation of a single body driven by body torques and body-z thrust.
  /// Errors from the implicit solve are rethrown as SolverError with the step index.
  Trajectory simulate(const BodyParams &params, const BodyState &initial,
                      const std::vector<ControlInput> &inputs, double dt, int N,
                      double tol = 1e-12);

  /// Spatial angular momentum R_k vee(F_k J - J F_k^T) / dt; constant along
  /// torque-free trajectories.
  Vec3 spatial_angular_momentum(const BodyState &state, const Mat3 &J, double dt);

} // namespace lgtraj

#endif // LGTRAJ_RIGID_BODY_HPP
