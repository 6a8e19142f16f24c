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

#include <stdexcept>
#include <utility>

namespace lgtraj
{
  double chordal_cost(const Rotation &R, const Rotation &R_d, const Mat3 &W)
  {
    const Mat3 A = R.matrix() * R_d.matrix().transpose() - Mat3::Identity();
    return 0.5 * (A * W * A.transpose()).trace();
  }

  Expansion chordal_cost_expansion(const Rotation &R, const Rotation &R_d, const Mat3 &W, EvalLevel level)
  {
    Expansion e;
    e.resize(1, 3, level);
    e.value[0] = chordal_cost(R, R_d, W);
    if (level == EvalLevel::Value)
    {
      return e;
    }
    const Mat3 A0 = R.matrix() * R_d.matrix().transpose() - Mat3::Identity();
    const Mat3 Ws = 0.5 * (W + W.transpose());
    const Mat3 B = R_d.matrix().transpose() * Ws * A0.transpose() * R.matrix();
    e.jacobian.row(0) = -vee_skew(B).transpose();
    if (level == EvalLevel::Hessian)
    {
      const Mat3 P = R_d.matrix().transpose() * Ws * R_d.matrix();
      e.hessians[0] = P.trace() * Mat3::Identity() - P + 0.5 * (B + B.transpose()) - B.trace() * Mat3::Identity();
    }
    return e;
  }

  Expansion quad_cost(const Eigen::VectorXd &p, const Eigen::VectorXd &p_d, const Eigen::MatrixXd &W,
                      EvalLevel level)
  {
    const int n = static_cast<int>(p.size());
    Expansion e;
    e.resize(1, n, level);
    const Eigen::VectorXd r = p - p_d;
    const Eigen::MatrixXd Ws = 0.5 * (W + W.transpose());
    e.value[0] = 0.5 * r.dot(Ws * r);
    if (level != EvalLevel::Value)
    {
      e.jacobian.row(0) = (Ws * r).transpose();
    }
    if (level == EvalLevel::Hessian)
    {
      e.hessians[0] = Ws;
    }
    return e;
  }

  ChordalCostBlock::ChordalCostBlock(const VariableLayout &layout, int slot, const Rotation &target, const Mat3 &W,
                                     std::string family)
      : Block(std::move(family), BlockKind::Objective, 1, {slot}, layout), target_(target), W_(W)
  {
    if (layout.slot(slot).kind != SlotKind::Rotation)
    {
      throw std::invalid_argument("ChordalCostBlock: slot is not a rotation");
    }
  }

  void ChordalCostBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    out = chordal_cost_expansion(x.rot[slots()[0]], target_, W_, level);
  }

  QuadCostBlock::QuadCostBlock(const VariableLayout &layout, int slot, Eigen::VectorXd target, Eigen::MatrixXd W,
                               std::string family)
      : Block(std::move(family), BlockKind::Objective, 1, {slot}, layout), target_(std::move(target)),
        W_(std::move(W))
  {
    const int n = layout.slot(slot).dim;
    if (layout.slot(slot).kind != SlotKind::Euclidean)
    {
      throw std::invalid_argument("QuadCostBlock: slot is not Euclidean");
    }
    if (target_.size() != n || W_.rows() != n || W_.cols() != n)
    {
      throw std::invalid_argument("QuadCostBlock: target or weight does not match slot");
    }
  }

  void QuadCostBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    out = quad_cost(x.vec[slots()[0]], target_, W_, level);
  }

} // namespace lgtraj
