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

#ifndef LGTRAJ_CONSTRAINTS_HPP
#define LGTRAJ_CONSTRAINTS_HPP

#include "lgtraj/problem.hpp"
#include "lgtraj/rigid_body.hpp"

#include <random>

namespace lgtraj
{
  // ---------------------------------------------------------------------------
  // Closed-form residuals and second-order retraction expansions.
  //
  // Every *_expansion returns value, Jacobian and per-row symmetric Hessians
  // over the local tangent order stated next to it. Rotations are perturbed as
  // R exp(t xi), Euclidean quantities as p + t xi.
  // ---------------------------------------------------------------------------

  Vec3 pivot_residual(const Rotation &R1, const Vec3 &p1, const Rotation &R2, const Vec3 &p2,
                      const Vec3 &r1, const Vec3 &r2);

  /// Local order (xi1_R, xi1_p, xi2_R, xi2_p).
  Expansion pivot_expansion(const Rotation &R1, const Vec3 &p1, const Rotation &R2, const Vec3 &p2,
                            const Vec3 &r1, const Vec3 &r2, EvalLevel level = EvalLevel::Hessian);

  /// Unit vectors defining an axis joint: u1, u2 in the parent frame span the
  /// plane orthogonal to the joint axis, `w` is the joint axis in the child frame.
  struct AxisFrame
  {
    Vec3 u1 = Vec3::UnitX();
    Vec3 u2 = Vec3::UnitY();
    Vec3 w = Vec3::UnitZ();

    /// Frame for a joint whose axis is `axis` in both body frames.
    static AxisFrame about(const Vec3 &axis);
  };

  /// ((R1 u1)^T (R2 w), (R1 u2)^T (R2 w)); with the default frame
  /// ((R1 e_x)^T (R2 e_z), (R1 e_y)^T (R2 e_z)).
  Eigen::Vector2d axis_residual(const Rotation &R1, const Rotation &R2, const AxisFrame &frame = {});

  /// Local order (xi1_R, xi2_R).
  Expansion axis_expansion(const Rotation &R1, const Rotation &R2, const AxisFrame &frame = {},
                           EvalLevel level = EvalLevel::Hessian);

  /// Rotational kinematics log(Y), Y = R_next^{-1} R_k F_k, expanded in the chart
  /// recentred at Y (BCH chain): local order (xi_R_next, xi_R_k, xi_F_k).
  Expansion rot_kin_expansion(const Rotation &R_k, const Rotation &F_k, const Rotation &R_next,
                              EvalLevel level = EvalLevel::Hessian);

  /// Unforced rotational dynamics vee(F_next J - J F_next^T - (J F_k - F_k^T J)).
  /// Local order (xi_F_k, xi_F_next).
  Expansion rot_dyn_expansion(const Rotation &F_k, const Rotation &F_next, const Mat3 &J,
                              EvalLevel level = EvalLevel::Hessian);

  /// Thrust contribution -dt R e_z u_z to the translational dynamics rows.
  /// Local order (xi_R, u_z).
  Expansion thrust_expansion(const Rotation &R, double u_z, double dt,
                             EvalLevel level = EvalLevel::Hessian);

  /// Body-frame torque r x (R^T lambda) of a world-frame joint force lambda.
  /// Local order (xi_R, lambda).
  Expansion pivot_torque_expansion(const Rotation &R, const Vec3 &r, const Vec3 &lambda,
                                   EvalLevel level = EvalLevel::Hessian);

  /// Body-frame torques that the axis-joint multipliers exert on the parent
  /// (`on_parent` true) or the child. Local order (xi_parent, xi_child, lambda(2)).
  Expansion axis_torque_expansion(const Rotation &Ra, const Rotation &Rb, const AxisFrame &frame,
                                  const Eigen::Vector2d &lambda, bool on_parent,
                                  EvalLevel level = EvalLevel::Hessian);

  /// r^2 - (x - x_c)^2 - (y - y_c)^2, i.e. <= 0 outside the cylinder.
  double obstacle_residual(const Vec3 &p, const Eigen::Vector2d &center, double radius);

  /// Inequality rows lo - u <= 0 and u - hi <= 0 (infinite bounds skipped),
  /// with their constant Jacobian over u. Rows are ordered lower bounds first.
  Expansion box_bounds(const Eigen::VectorXd &u, const Eigen::VectorXd &lo, const Eigen::VectorXd &hi,
                       EvalLevel level = EvalLevel::Hessian);

  // ---------------------------------------------------------------------------
  // Blocks
  // ---------------------------------------------------------------------------

  /// log(R_{k+1}^{-1} R_k F_k) = 0. Slots (R_next, R_k, F_k).
  class RotKinematicsBlock : public Block
  {
  public:
    RotKinematicsBlock(const VariableLayout &layout, int R_k, int F_k, int R_next);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;
    Eigen::VectorXd curve_value(const Point &base, const Point &moved) const override;
  };

  /// p_{k+1} - p_k - v_k dt = 0. Slots (p_next, p_k, v_k).
  class TransKinematicsBlock : public Block
  {
  public:
    TransKinematicsBlock(const VariableLayout &layout, int p_k, int v_k, int p_next, double dt);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    double dt_;
  };

  /// Rotational LGVI residual with a body torque that is linear in an input
  /// slot: rot_dyn - dt^2 * torque_map * u. Slots (F_k, F_next[, input]).
  class RotDynamicsBlock : public Block
  {
  public:
    RotDynamicsBlock(const VariableLayout &layout, int F_k, int F_next, int input, Eigen::MatrixXd torque_map,
                     const Mat3 &J, double dt);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    int input_;
    Eigen::MatrixXd torque_map_;
    Mat3 J_;
    double dt_;
  };

  /// m v_{k+1} - m v_k - m g dt = 0. Slots (v_k, v_next).
  class TransDynamicsBlock : public Block
  {
  public:
    TransDynamicsBlock(const VariableLayout &layout, int v_k, int v_next, double mass, const Vec3 &gravity,
                       double dt);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    double mass_;
    Vec3 gravity_;
    double dt_;
  };

  /// -dt R_{k+1} e_z u_z, added onto translational dynamics rows. Slots (R_next, input).
  class ThrustBlock : public Block
  {
  public:
    ThrustBlock(const VariableLayout &layout, int R_next, int input, int thrust_index, double dt);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    int thrust_index_;
    double dt_;
  };

  /// Fixed pose used for the ground side of a joint.
  struct GroundPose
  {
    Rotation R;
    Vec3 p = Vec3::Zero();
  };

  /// Pivot joint R_a r_a + p_a - R_b r_b - p_b = 0. Slots (R_a, p_a, R_b, p_b);
  /// the parent pair may be -1 (ground).
  class PivotBlock : public Block
  {
  public:
    PivotBlock(const VariableLayout &layout, int R_a, int p_a, int R_b, int p_b, const Vec3 &r_a,
               const Vec3 &r_b, GroundPose ground = {});
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    Vec3 r_a_, r_b_;
    GroundPose ground_;
  };

  /// Axis joint (R_a u_i)^T (R_b w) = 0, i = 1, 2. Slots (R_a, R_b); R_a may be -1.
  class AxisBlock : public Block
  {
  public:
    AxisBlock(const VariableLayout &layout, int R_a, int R_b, const AxisFrame &frame, GroundPose ground = {});
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    AxisFrame frame_;
    GroundPose ground_;
  };

  /// Pivot-joint reaction wrench added onto the dynamics rows of both bodies.
  /// Rows: (rot_a, trans_a, rot_b, trans_b), parent rows omitted for ground.
  /// Slots (R_a_next, R_b_next, input); multipliers read from input[offset..offset+3).
  class PivotWrenchBlock : public Block
  {
  public:
    PivotWrenchBlock(const VariableLayout &layout, int R_a, int R_b, int input, int lambda_offset,
                     const Vec3 &r_a, const Vec3 &r_b, double dt);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    int lambda_offset_;
    Vec3 r_a_, r_b_;
    double dt_;
    bool grounded_;
  };

  /// Axis-joint reaction torques added onto the rotational dynamics rows.
  /// Rows: (rot_a, rot_b), parent rows omitted for ground. Slots (R_a, R_b, input).
  class AxisWrenchBlock : public Block
  {
  public:
    AxisWrenchBlock(const VariableLayout &layout, int R_a, int R_b, int input, int lambda_offset,
                    const AxisFrame &frame, double dt, GroundPose ground = {});
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    int lambda_offset_;
    AxisFrame frame_;
    double dt_;
    GroundPose ground_;
  };

  /// Joint motor torque tau = input[index] about the joint axis, added onto the
  /// rotational dynamics rows (parent, child): +dt^2 a tau and -dt^2 w tau with
  /// a, w the axis in the parent and child frames. Parent rows omitted for ground.
  class JointTorqueBlock : public Block
  {
  public:
    JointTorqueBlock(const VariableLayout &layout, int input, int index, bool has_parent, const Vec3 &axis_parent,
                     const Vec3 &axis_child, double dt);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    int index_;
    bool has_parent_;
    Vec3 a_, w_;
    double dt_;
  };

  /// log(R_init^{-1} R) = 0, expanded in the chart recentred at the current R.
  class InitialRotationBlock : public Block
  {
  public:
    InitialRotationBlock(const VariableLayout &layout, int R, const Rotation &target);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;
    Eigen::VectorXd curve_value(const Point &base, const Point &moved) const override;

  private:
    Rotation target_;
  };

  /// x - target = 0 on a Euclidean slot.
  class InitialVectorBlock : public Block
  {
  public:
    InitialVectorBlock(const VariableLayout &layout, int slot, Eigen::VectorXd target);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    Eigen::VectorXd target_;
  };

  /// Cylinder avoidance r^2 - (x - x_c)^2 - (y - y_c)^2 <= 0 on a position slot.
  class ObstacleBlock : public Block
  {
  public:
    ObstacleBlock(const VariableLayout &layout, int p, const Eigen::Vector2d &center, double radius);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    Eigen::Vector2d center_;
    double radius_;
  };

  /// Box limits on (a subset of) an input slot, in box_bounds row order.
  class BoxBlock : public Block
  {
  public:
    BoxBlock(const VariableLayout &layout, int input, Eigen::VectorXd lo, Eigen::VectorXd hi);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    Eigen::VectorXd lo_, hi_;
  };

  /// Wraps a block and adds `delta` to one Jacobian entry. Used to check that
  /// the finite-difference oracle actually detects broken derivatives.
  class FaultInjectedBlock : public Block
  {
  public:
    FaultInjectedBlock(BlockPtr inner, int row, int col, double delta);
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;
    Eigen::VectorXd curve_value(const Point &base, const Point &moved) const override;

  private:
    BlockPtr inner_;
    int row_, col_;
    double delta_;
  };

  // ---------------------------------------------------------------------------
  // Finite-difference oracle
  // ---------------------------------------------------------------------------

  struct FdCheckResult
  {
    double gradient_error = 0.0;
    double hessian_error = 0.0;
  };

  struct FdCheckOptions
  {
    double gradient_step = 1e-5;
    double hessian_step = 1e-3;
  };

  /// Compares the block's analytic expansion at `x` with central differences
  /// of its residual along retraction curves in `trials` random directions.
  /// Errors are relative, worst case over trials; comparisons where both sides
  /// sit below the finite-difference rounding floor count as exact.
  FdCheckResult fd_check(const Block &block, const Point &x, int trials, std::mt19937_64 &rng,
                         const FdCheckOptions &options = {});

} // namespace lgtraj

#endif // LGTRAJ_CONSTRAINTS_HPP
