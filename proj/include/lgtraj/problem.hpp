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

#ifndef LGTRAJ_PROBLEM_HPP
#define LGTRAJ_PROBLEM_HPP

#include "lgtraj/lie.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lgtraj
{
  enum class SlotKind
  {
    Rotation,
    Euclidean
  };

  /// One manifold factor of the decision variable.
  struct Slot
  {
    SlotKind kind = SlotKind::Euclidean;
    int dim = 0;
    int tangent_offset = 0;
    int timestep = -1;
    int body = -1; ///< -1 for input slots
  };

  /// Deterministic map from slots to tangent coordinates. Slots are appended in
  /// the order they are declared; the scenario builders declare timesteps
  /// outermost, then bodies in order with (R, p, F, v), then the step's inputs.
  class VariableLayout
  {
  public:
    int add_rotation(int timestep, int body);
    int add_euclidean(int dim, int timestep, int body);

    const Slot &slot(int id) const { return slots_.at(id); }
    int num_slots() const { return static_cast<int>(slots_.size()); }
    int tangent_dim() const { return tangent_dim_; }

  private:
    std::vector<Slot> slots_;
    int tangent_dim_ = 0;
  };

  /// Point on the product manifold. Entries are indexed by slot id; rotation
  /// slots use `rot`, Euclidean slots use `vec`.
  struct Point
  {
    std::vector<Rotation> rot;
    std::vector<Eigen::VectorXd> vec;

    static Point zeros(const VariableLayout &layout);
  };

  /// Tangent vector in the coordinates of a VariableLayout.
  using ProductTangent = Eigen::VectorXd;

  /// Retraction on the product manifold: R exp(xi) on rotation slots,
  /// addition on Euclidean slots.
  Point retract(const VariableLayout &layout, const Point &x, const ProductTangent &d);

  enum class BlockKind
  {
    Objective,
    Equality,
    Inequality
  };

  enum class EvalLevel
  {
    Value,
    Gradient,
    Hessian
  };

  /// Residual together with its first/second-order retraction expansion.
  ///
  /// Along the curve t -> R_x(t d) (d restricted to the block's slots):
  ///   r(t) = value + t * jacobian d + t^2/2 * [d^T hessians[i] d]_i + O(t^3).
  struct Expansion
  {
    Eigen::VectorXd value;
    Eigen::MatrixXd jacobian;
    std::vector<Eigen::MatrixXd> hessians;

    void resize(int dim, int local_dim, EvalLevel level);

    Eigen::VectorXd first_order(const Eigen::VectorXd &d) const { return jacobian * d; }
    /// Coefficient of t^2, i.e. half the Hessian quadratic form.
    Eigen::VectorXd second_order(const Eigen::VectorXd &d) const;
  };

  /// A group of residual rows over a small set of slots.
  ///
  /// Local tangent coordinates are the concatenation of the slots' tangent
  /// blocks in `slots()` order. A slot id of -1 marks a fixed factor (for
  /// example the ground link) that contributes no columns.
  class Block
  {
  public:
    Block(std::string family, BlockKind kind, int dim, std::vector<int> slots,
          const VariableLayout &layout);
    virtual ~Block() = default;

    virtual void evaluate(const Point &x, EvalLevel level, Expansion &out) const = 0;

    /// Residual along a retraction curve, used by the finite-difference
    /// oracle. Defaults to the residual at `moved`; blocks whose expansion is
    /// defined in a chart recentred at `base` override it.
    virtual Eigen::VectorXd curve_value(const Point &base, const Point &moved) const;

    const std::string &family() const { return family_; }
    BlockKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int local_dim() const { return local_dim_; }
    std::span<const int> slots() const { return slots_; }
    std::span<const int> local_offsets() const { return local_offsets_; }
    std::span<const int> slot_dims() const { return slot_dims_; }
    std::span<const SlotKind> slot_kinds() const { return slot_kinds_; }

    /// Moves `x` along the local direction `d` (length local_dim()).
    Point retract_local(const Point &x, const Eigen::VectorXd &d) const;

    Eigen::VectorXd value(const Point &x) const;

  private:
    std::string family_;
    BlockKind kind_;
    int dim_;
    std::vector<int> slots_;
    std::vector<int> local_offsets_;
    std::vector<int> slot_dims_;
    std::vector<SlotKind> slot_kinds_;
    int local_dim_ = 0;
  };

  using BlockPtr = std::shared_ptr<const Block>;

} // namespace lgtraj

#endif // LGTRAJ_PROBLEM_HPP
