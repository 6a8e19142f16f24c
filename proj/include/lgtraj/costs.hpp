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

#ifndef LGTRAJ_COSTS_HPP
#define LGTRAJ_COSTS_HPP

#include "lgtraj/problem.hpp"
#include "lgtraj/rigid_body.hpp"

namespace lgtraj
{
  /// 1/2 tr((R R_d^T - I) W (R R_d^T - I)^T).
  double chordal_cost(const Rotation &R, const Rotation &R_d, const Mat3 &W);

  /// Value, gradient (3) and Hessian (3x3) of the chordal cost along R exp(t xi).
  Expansion chordal_cost_expansion(const Rotation &R, const Rotation &R_d, const Mat3 &W,
                                   EvalLevel level = EvalLevel::Hessian);

  /// 1/2 (p - p_d)^T W (p - p_d) with gradient W (p - p_d) and Hessian W.
  Expansion quad_cost(const Eigen::VectorXd &p, const Eigen::VectorXd &p_d, const Eigen::MatrixXd &W,
                      EvalLevel level = EvalLevel::Hessian);

  /// Weights and targets for one rigid body. Targets apply at every knot
  /// unless `terminal_only` is set, in which case only the final knot is charged.
  struct CostSpec
  {
    Mat3 W_R = Mat3::Identity();
    Mat3 W_p = Mat3::Identity();
    Mat3 W_F = Mat3::Identity(); ///< per unit angular rate; scenarios divide by dt^2
    Mat3 W_v = Mat3::Identity();
    double input_weight = 1e-4;

    Rotation R_d;
    Vec3 p_d = Vec3::Zero();
    Rotation F_d;
    Vec3 v_d = Vec3::Zero();

    bool terminal_only = false;
  };

  class ChordalCostBlock : public Block
  {
  public:
    ChordalCostBlock(const VariableLayout &layout, int slot, const Rotation &target, const Mat3 &W,
                     std::string family = "cost_rotation");
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    Rotation target_;
    Mat3 W_;
  };

  class QuadCostBlock : public Block
  {
  public:
    QuadCostBlock(const VariableLayout &layout, int slot, Eigen::VectorXd target, Eigen::MatrixXd W,
                  std::string family = "cost_vector");
    void evaluate(const Point &x, EvalLevel level, Expansion &out) const override;

  private:
    Eigen::VectorXd target_;
    Eigen::MatrixXd W_;
  };

} // namespace lgtraj

#endif // LGTRAJ_COSTS_HPP
