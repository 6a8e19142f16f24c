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

#include "lgtraj/problem.hpp"

#include <stdexcept>
#include <utility>

namespace lgtraj
{
  int VariableLayout::add_rotation(int timestep, int body)
  {
    slots_.push_back(Slot{SlotKind::Rotation, 3, tangent_dim_, timestep, body});
    tangent_dim_ += 3;
    return num_slots() - 1;
  }

  int VariableLayout::add_euclidean(int dim, int timestep, int body)
  {
    if (dim <= 0)
    {
      throw std::invalid_argument("VariableLayout: Euclidean slot needs positive dimension");
    }
    slots_.push_back(Slot{SlotKind::Euclidean, dim, tangent_dim_, timestep, body});
    tangent_dim_ += dim;
    return num_slots() - 1;
  }

  Point Point::zeros(const VariableLayout &layout)
  {
    Point x;
    x.rot.resize(layout.num_slots());
    x.vec.resize(layout.num_slots());
    for (int i = 0; i < layout.num_slots(); ++i)
    {
      if (layout.slot(i).kind == SlotKind::Euclidean)
      {
        x.vec[i] = Eigen::VectorXd::Zero(layout.slot(i).dim);
      }
    }
    return x;
  }

  Point retract(const VariableLayout &layout, const Point &x, const ProductTangent &d)
  {
    if (d.size() != layout.tangent_dim())
    {
      throw std::invalid_argument("retract: direction does not match layout");
    }
    Point out = x;
    for (int i = 0; i < layout.num_slots(); ++i)
    {
      const Slot &s = layout.slot(i);
      if (s.kind == SlotKind::Rotation)
      {
        out.rot[i] = x.rot[i].retract(d.segment<3>(s.tangent_offset));
      }
      else
      {
        out.vec[i] = x.vec[i] + d.segment(s.tangent_offset, s.dim);
      }
    }
    return out;
  }

  void Expansion::resize(int dim, int local_dim, EvalLevel level)
  {
    value.setZero(dim);
    if (level == EvalLevel::Value)
    {
      jacobian.resize(0, 0);
      hessians.clear();
      return;
    }
    jacobian.setZero(dim, local_dim);
    if (level == EvalLevel::Hessian)
    {
      hessians.resize(dim);
      for (auto &H : hessians)
      {
        H.setZero(local_dim, local_dim);
      }
    }
    else
    {
      hessians.clear();
    }
  }

  Eigen::VectorXd Expansion::second_order(const Eigen::VectorXd &d) const
  {
    Eigen::VectorXd out(hessians.size());
    for (std::size_t i = 0; i < hessians.size(); ++i)
    {
      out[i] = 0.5 * d.dot(hessians[i] * d);
    }
    return out;
  }

  Block::Block(std::string family, BlockKind kind, int dim, std::vector<int> slots,
               const VariableLayout &layout)
      : family_(std::move(family)), kind_(kind), dim_(dim), slots_(std::move(slots))
  {
    for (int id : slots_)
    {
      local_offsets_.push_back(local_dim_);
      if (id < 0)
      {
        slot_dims_.push_back(0);
        slot_kinds_.push_back(SlotKind::Rotation);
        continue;
      }
      const Slot &s = layout.slot(id);
      slot_dims_.push_back(s.dim);
      slot_kinds_.push_back(s.kind);
      local_dim_ += s.dim;
    }
  }

  Eigen::VectorXd Block::curve_value(const Point &, const Point &moved) const
  {
    return value(moved);
  }

  Eigen::VectorXd Block::value(const Point &x) const
  {
    Expansion e;
    evaluate(x, EvalLevel::Value, e);
    return e.value;
  }

  Point Block::retract_local(const Point &x, const Eigen::VectorXd &d) const
  {
    Point out = x;
    for (std::size_t i = 0; i < slots_.size(); ++i)
    {
      const int id = slots_[i];
      if (id < 0)
      {
        continue;
      }
      if (slot_kinds_[i] == SlotKind::Rotation)
      {
        out.rot[id] = x.rot[id].retract(d.segment<3>(local_offsets_[i]));
      }
      else
      {
        out.vec[id] = x.vec[id] + d.segment(local_offsets_[i], slot_dims_[i]);
      }
    }
    return out;
  }

} // namespace lgtraj
