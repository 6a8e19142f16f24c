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

#include "lgtraj/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace lgtraj
{
  namespace
  {
    const Vec3 kEz = Vec3::UnitZ();

    /// 1/2 (a b^T + b a^T) - (a . b) I : quadratic form of x -> a^T hat(x)^2 b.
    Mat3 sym_outer(const Vec3 &a, const Vec3 &b)
    {
      return 0.5 * (a * b.transpose() + b * a.transpose()) - a.dot(b) * Mat3::Identity();
    }

    bool wants_gradient(EvalLevel level) { return level != EvalLevel::Value; }
    bool wants_hessian(EvalLevel level) { return level == EvalLevel::Hessian; }

    /// Writes a symmetric pair of off-diagonal blocks.
    void set_cross(Eigen::MatrixXd &H, int r, int c, const Eigen::MatrixXd &B)
    {
      H.block(r, c, B.rows(), B.cols()) += B;
      H.block(c, r, B.cols(), B.rows()) += B.transpose();
    }

    /// Adds rows of `src` onto rows [row, row + src.dim) of `out`, mapping the
    /// source's local columns through `cols` (-1 drops the column).
    void scatter(const Expansion &src, const std::vector<int> &cols, int row, EvalLevel level, Expansion &out)
    {
      const int n = static_cast<int>(src.value.size());
      out.value.segment(row, n) += src.value;
      if (!wants_gradient(level))
      {
        return;
      }
      for (int j = 0; j < static_cast<int>(cols.size()); ++j)
      {
        if (cols[j] >= 0)
        {
          out.jacobian.block(row, cols[j], n, 1) += src.jacobian.col(j);
        }
      }
      if (!wants_hessian(level))
      {
        return;
      }
      for (int i = 0; i < n; ++i)
      {
        for (int a = 0; a < static_cast<int>(cols.size()); ++a)
        {
          if (cols[a] < 0)
          {
            continue;
          }
          for (int b = 0; b < static_cast<int>(cols.size()); ++b)
          {
            if (cols[b] >= 0)
            {
              out.hessians[row + i](cols[a], cols[b]) += src.hessians[i](a, b);
            }
          }
        }
      }
    }

    std::vector<int> column_map(std::initializer_list<std::pair<int, int>> ranges)
    {
      // Each pair is (destination offset or -1, width).
      std::vector<int> out;
      for (const auto &[dst, width] : ranges)
      {
        for (int i = 0; i < width; ++i)
        {
          out.push_back(dst < 0 ? -1 : dst + i);
        }
      }
      return out;
    }

    void scale(Expansion &e, double s)
    {
      e.value *= s;
      e.jacobian *= s;
      for (auto &H : e.hessians)
      {
        H *= s;
      }
    }

    const Rotation &rot_or(const Point &x, int slot, const Rotation &fallback)
    {
      return slot < 0 ? fallback : x.rot[slot];
    }

    Vec3 vec3_or(const Point &x, int slot, const Vec3 &fallback)
    {
      return slot < 0 ? fallback : Vec3(x.vec[slot]);
    }
  } // namespace

  // ---------------------------------------------------------------------------

  Vec3 pivot_residual(const Rotation &R1, const Vec3 &p1, const Rotation &R2, const Vec3 &p2,
                      const Vec3 &r1, const Vec3 &r2)
  {
    return R1 * r1 + p1 - R2 * r2 - p2;
  }

  Expansion pivot_expansion(const Rotation &R1, const Vec3 &p1, const Rotation &R2, const Vec3 &p2,
                            const Vec3 &r1, const Vec3 &r2, EvalLevel level)
  {
    Expansion e;
    e.resize(3, 12, level);
    e.value = pivot_residual(R1, p1, R2, p2, r1, r2);
    if (wants_gradient(level))
    {
      e.jacobian.block<3, 3>(0, 0) = -R1.matrix() * hat(r1);
      e.jacobian.block<3, 3>(0, 3) = Mat3::Identity();
      e.jacobian.block<3, 3>(0, 6) = R2.matrix() * hat(r2);
      e.jacobian.block<3, 3>(0, 9) = -Mat3::Identity();
    }
    if (wants_hessian(level))
    {
      for (int c = 0; c < 3; ++c)
      {
        e.hessians[c].block<3, 3>(0, 0) = sym_outer(R1.matrix().row(c).transpose(), r1);
        e.hessians[c].block<3, 3>(6, 6) = -sym_outer(R2.matrix().row(c).transpose(), r2);
      }
    }
    return e;
  }

  AxisFrame AxisFrame::about(const Vec3 &axis)
  {
    AxisFrame f;
    f.w = axis.normalized();
    // Any orthonormal completion works; pick the least aligned basis vector.
    int k = 0;
    f.w.cwiseAbs().minCoeff(&k);
    f.u1 = (Vec3::Unit(k) - f.w.dot(Vec3::Unit(k)) * f.w).normalized();
    f.u2 = f.w.cross(f.u1);
    return f;
  }

  Eigen::Vector2d axis_residual(const Rotation &R1, const Rotation &R2, const AxisFrame &frame)
  {
    const Vec3 b = R2 * frame.w;
    return Eigen::Vector2d((R1 * frame.u1).dot(b), (R1 * frame.u2).dot(b));
  }

  Expansion axis_expansion(const Rotation &R1, const Rotation &R2, const AxisFrame &frame, EvalLevel level)
  {
    Expansion e;
    e.resize(2, 6, level);
    e.value = axis_residual(R1, R2, frame);
    if (!wants_gradient(level))
    {
      return e;
    }
    const Mat3 M = R1.matrix().transpose() * R2.matrix();
    const Vec3 &w = frame.w;
    const Vec3 m = M * w;
    for (int i = 0; i < 2; ++i)
    {
      const Vec3 &u = i == 0 ? frame.u1 : frame.u2;
      const Vec3 n = M.transpose() * u;
      e.jacobian.block<1, 3>(i, 0) = u.cross(m).transpose();
      e.jacobian.block<1, 3>(i, 3) = w.cross(n).transpose();
      if (wants_hessian(level))
      {
        e.hessians[i].block<3, 3>(0, 0) = sym_outer(u, m);
        e.hessians[i].block<3, 3>(3, 3) = sym_outer(n, w);
        set_cross(e.hessians[i], 0, 3, hat(u).transpose() * M * hat(w));
      }
    }
    return e;
  }

  Expansion rot_kin_expansion(const Rotation &R_k, const Rotation &F_k, const Rotation &R_next, EvalLevel level)
  {
    Expansion e;
    e.resize(3, 9, level);
    const Rotation Y = R_next.inverse() * R_k * F_k;
    e.value = Y.log();
    if (!wants_gradient(level))
    {
      return e;
    }
    // Chain (R_next^{-1}, R_k, F_k); perturbing R_next by exp(t xi) moves the
    // first factor by exp(-t R_next xi), giving the map -Y^T on xi_R_next.
    const Mat3 A[3] = {-Y.matrix().transpose(), F_k.matrix().transpose(), Mat3::Identity()};
    for (int i = 0; i < 3; ++i)
    {
      e.jacobian.block<3, 3>(0, 3 * i) = A[i];
    }
    if (wants_hessian(level))
    {
      for (int c = 0; c < 3; ++c)
      {
        // (A_i a) x (A_j b) component c = a^T A_i^T hat(e_c)^T A_j b.
        const Mat3 Ec = hat(Vec3::Unit(c)).transpose();
        for (int i = 0; i < 3; ++i)
        {
          for (int j = i + 1; j < 3; ++j)
          {
            set_cross(e.hessians[c], 3 * i, 3 * j, 0.5 * A[i].transpose() * Ec * A[j]);
          }
        }
      }
    }
    return e;
  }

  Expansion rot_dyn_expansion(const Rotation &F_k, const Rotation &F_next, const Mat3 &J, EvalLevel level)
  {
    Expansion e;
    e.resize(3, 6, level);
    const Mat3 &Fk = F_k.matrix();
    const Mat3 &Fn = F_next.matrix();
    const Vec3 mk = vee_skew(J * Fk);
    const Vec3 mn = vee_skew(Fn * J);
    e.value = mn - mk;
    if (!wants_gradient(level))
    {
      return e;
    }
    for (int j = 0; j < 3; ++j)
    {
      const Mat3 Ej = hat(Vec3::Unit(j));
      e.jacobian.block<3, 1>(0, j) = -vee_skew(J * Fk * Ej);
      e.jacobian.block<3, 1>(0, 3 + j) = vee_skew(Fn * Ej * J);
    }
    if (wants_hessian(level))
    {
      for (int c = 0; c < 3; ++c)
      {
        const Mat3 C = hat(Vec3::Unit(c));
        e.hessians[c].block<3, 3>(0, 0) =
            -(0.5 * (C.transpose() * J * Fk + Fk.transpose() * J * C) - mk[c] * Mat3::Identity());
        e.hessians[c].block<3, 3>(3, 3) =
            0.5 * (J * C.transpose() * Fn + Fn.transpose() * C * J) - mn[c] * Mat3::Identity();
      }
    }
    return e;
  }

  Expansion thrust_expansion(const Rotation &R, double u_z, double dt, EvalLevel level)
  {
    Expansion e;
    e.resize(3, 4, level);
    const Vec3 axis = R * kEz;
    e.value = -dt * u_z * axis;
    if (!wants_gradient(level))
    {
      return e;
    }
    e.jacobian.block<3, 3>(0, 0) = u_z * dt * R.matrix() * hat(kEz);
    e.jacobian.block<3, 1>(0, 3) = -dt * axis;
    if (wants_hessian(level))
    {
      for (int c = 0; c < 3; ++c)
      {
        const Vec3 w = R.matrix().row(c).transpose();
        e.hessians[c].block<3, 3>(0, 0) = -u_z * dt * sym_outer(w, kEz);
        set_cross(e.hessians[c], 0, 3, -dt * kEz.cross(w));
      }
    }
    return e;
  }

  Expansion pivot_torque_expansion(const Rotation &R, const Vec3 &r, const Vec3 &lambda, EvalLevel level)
  {
    Expansion e;
    e.resize(3, 6, level);
    const Mat3 Rt = R.matrix().transpose();
    const Vec3 q = Rt * lambda;
    e.value = r.cross(q);
    if (!wants_gradient(level))
    {
      return e;
    }
    e.jacobian.block<3, 3>(0, 0) = hat(r) * hat(q);
    e.jacobian.block<3, 3>(0, 3) = hat(r) * Rt;
    if (wants_hessian(level))
    {
      for (int c = 0; c < 3; ++c)
      {
        const Vec3 w = Vec3::Unit(c).cross(r);
        e.hessians[c].block<3, 3>(0, 0) = sym_outer(w, q);
        set_cross(e.hessians[c], 0, 3, hat(w) * Rt);
      }
    }
    return e;
  }

  Expansion axis_torque_expansion(const Rotation &Ra, const Rotation &Rb, const AxisFrame &frame,
                                  const Eigen::Vector2d &lambda, bool on_parent, EvalLevel level)
  {
    Expansion e;
    e.resize(3, 8, level);
    Eigen::Matrix<double, 3, 2> U;
    U << frame.u1, frame.u2;
    const Vec3 &w = frame.w;
    const Mat3 M = Ra.matrix().transpose() * Rb.matrix();
    const Vec3 l = U * lambda;

    if (on_parent)
    {
      const Vec3 m = M * w;
      e.value = l.cross(m);
      if (!wants_gradient(level))
      {
        return e;
      }
      e.jacobian.block<3, 3>(0, 0) = hat(l) * hat(m);
      e.jacobian.block<3, 3>(0, 3) = -hat(l) * M * hat(w);
      e.jacobian.block<3, 2>(0, 6) = -hat(m) * U;
      if (wants_hessian(level))
      {
        for (int c = 0; c < 3; ++c)
        {
          const Vec3 ec = Vec3::Unit(c);
          const Vec3 z = ec.cross(l);
          const Vec3 n = M.transpose() * z;
          Eigen::MatrixXd &H = e.hessians[c];
          H.block<3, 3>(0, 0) = sym_outer(z, m);
          H.block<3, 3>(3, 3) = sym_outer(n, w);
          set_cross(H, 0, 3, hat(z).transpose() * M * hat(w));
          set_cross(H, 6, 0, -U.transpose() * hat(ec) * hat(m));
          set_cross(H, 6, 3, U.transpose() * hat(ec) * M * hat(w));
        }
      }
      return e;
    }

    const Vec3 q = M.transpose() * l;
    e.value = w.cross(q);
    if (!wants_gradient(level))
    {
      return e;
    }
    e.jacobian.block<3, 3>(0, 0) = -hat(w) * M.transpose() * hat(l);
    e.jacobian.block<3, 3>(0, 3) = hat(w) * hat(q);
    e.jacobian.block<3, 2>(0, 6) = hat(w) * M.transpose() * U;
    if (wants_hessian(level))
    {
      for (int c = 0; c < 3; ++c)
      {
        const Vec3 z = Vec3::Unit(c).cross(w);
        const Vec3 n = M * z;
        Eigen::MatrixXd &H = e.hessians[c];
        H.block<3, 3>(3, 3) = sym_outer(z, q);
        H.block<3, 3>(0, 0) = sym_outer(n, l);
        set_cross(H, 0, 3, hat(l).transpose() * M * hat(z));
        set_cross(H, 6, 3, -U.transpose() * M * hat(z));
        set_cross(H, 6, 0, U.transpose() * hat(n));
      }
    }
    return e;
  }

  double obstacle_residual(const Vec3 &p, const Eigen::Vector2d &center, double radius)
  {
    const Eigen::Vector2d d = p.head<2>() - center;
    return radius * radius - d.squaredNorm();
  }

  Expansion box_bounds(const Eigen::VectorXd &u, const Eigen::VectorXd &lo, const Eigen::VectorXd &hi,
                       EvalLevel level)
  {
    if (lo.size() != u.size() || hi.size() != u.size())
    {
      throw std::invalid_argument("box_bounds: bound sizes do not match");
    }
    std::vector<std::pair<int, double>> rows; // (index, sign)
    for (int i = 0; i < u.size(); ++i)
    {
      if (std::isfinite(lo[i]))
      {
        rows.emplace_back(i, -1.0);
      }
    }
    for (int i = 0; i < u.size(); ++i)
    {
      if (std::isfinite(hi[i]))
      {
        rows.emplace_back(i, 1.0);
      }
    }
    Expansion e;
    e.resize(static_cast<int>(rows.size()), static_cast<int>(u.size()), level);
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
      const auto [i, sign] = rows[r];
      e.value[r] = sign > 0.0 ? u[i] - hi[i] : lo[i] - u[i];
      if (wants_gradient(level))
      {
        e.jacobian(r, i) = sign;
      }
    }
    return e;
  }

  // ---------------------------------------------------------------------------

  RotKinematicsBlock::RotKinematicsBlock(const VariableLayout &layout, int R_k, int F_k, int R_next)
      : Block("rot_kinematics", BlockKind::Equality, 3, {R_next, R_k, F_k}, layout)
  {
  }

  void RotKinematicsBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const auto s = slots();
    out = rot_kin_expansion(x.rot[s[1]], x.rot[s[2]], x.rot[s[0]], level);
  }

  Eigen::VectorXd RotKinematicsBlock::curve_value(const Point &base, const Point &moved) const
  {
    const auto s = slots();
    const Rotation Ybar = base.rot[s[0]].inverse() * base.rot[s[1]] * base.rot[s[2]];
    const Rotation Y = moved.rot[s[0]].inverse() * moved.rot[s[1]] * moved.rot[s[2]];
    return Ybar.log() + (Ybar.inverse() * Y).log();
  }

  TransKinematicsBlock::TransKinematicsBlock(const VariableLayout &layout, int p_k, int v_k, int p_next, double dt)
      : Block("trans_kinematics", BlockKind::Equality, 3, {p_next, p_k, v_k}, layout), dt_(dt)
  {
  }

  void TransKinematicsBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const auto s = slots();
    out.resize(3, 9, level);
    out.value = x.vec[s[0]] - x.vec[s[1]] - dt_ * x.vec[s[2]];
    if (wants_gradient(level))
    {
      out.jacobian.block<3, 3>(0, 0) = Mat3::Identity();
      out.jacobian.block<3, 3>(0, 3) = -Mat3::Identity();
      out.jacobian.block<3, 3>(0, 6) = -dt_ * Mat3::Identity();
    }
  }

  RotDynamicsBlock::RotDynamicsBlock(const VariableLayout &layout, int F_k, int F_next, int input,
                                     Eigen::MatrixXd torque_map, const Mat3 &J, double dt)
      : Block("rot_dynamics", BlockKind::Equality, 3,
              input < 0 ? std::vector<int>{F_k, F_next} : std::vector<int>{F_k, F_next, input}, layout),
        input_(input), torque_map_(std::move(torque_map)), J_(J), dt_(dt)
  {
    if (input_ >= 0 && (torque_map_.rows() != 3 || torque_map_.cols() != layout.slot(input_).dim))
    {
      throw std::invalid_argument("RotDynamicsBlock: torque map does not match input slot");
    }
  }

  void RotDynamicsBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const auto s = slots();
    const Expansion core = rot_dyn_expansion(x.rot[s[0]], x.rot[s[1]], J_, level);
    out.resize(3, local_dim(), level);
    scatter(core, column_map({{0, 6}}), 0, level, out);
    if (input_ >= 0)
    {
      const double h2 = dt_ * dt_;
      out.value -= h2 * torque_map_ * x.vec[input_];
      if (wants_gradient(level))
      {
        out.jacobian.block(0, 6, 3, torque_map_.cols()) = -h2 * torque_map_;
      }
    }
  }

  TransDynamicsBlock::TransDynamicsBlock(const VariableLayout &layout, int v_k, int v_next, double mass,
                                         const Vec3 &gravity, double dt)
      : Block("trans_dynamics", BlockKind::Equality, 3, {v_k, v_next}, layout), mass_(mass), gravity_(gravity),
        dt_(dt)
  {
  }

  void TransDynamicsBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const auto s = slots();
    out.resize(3, 6, level);
    out.value = mass_ * (x.vec[s[1]] - x.vec[s[0]]) - mass_ * dt_ * gravity_;
    if (wants_gradient(level))
    {
      out.jacobian.block<3, 3>(0, 0) = -mass_ * Mat3::Identity();
      out.jacobian.block<3, 3>(0, 3) = mass_ * Mat3::Identity();
    }
  }

  ThrustBlock::ThrustBlock(const VariableLayout &layout, int R_next, int input, int thrust_index, double dt)
      : Block("thrust", BlockKind::Equality, 3, {R_next, input}, layout), thrust_index_(thrust_index), dt_(dt)
  {
    if (thrust_index_ < 0 || thrust_index_ >= layout.slot(input).dim)
    {
      throw std::invalid_argument("ThrustBlock: thrust index outside input slot");
    }
  }

  void ThrustBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const auto s = slots();
    const Expansion core = thrust_expansion(x.rot[s[0]], x.vec[s[1]][thrust_index_], dt_, level);
    out.resize(3, local_dim(), level);
    scatter(core, column_map({{0, 3}, {3 + thrust_index_, 1}}), 0, level, out);
  }

  PivotBlock::PivotBlock(const VariableLayout &layout, int R_a, int p_a, int R_b, int p_b, const Vec3 &r_a,
                         const Vec3 &r_b, GroundPose ground)
      : Block("pivot", BlockKind::Equality, 3, {R_a, p_a, R_b, p_b}, layout), r_a_(r_a), r_b_(r_b),
        ground_(std::move(ground))
  {
    if ((R_a < 0) != (p_a < 0))
    {
      throw std::invalid_argument("PivotBlock: parent pose must be all variable or all fixed");
    }
  }

  void PivotBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const auto s = slots();
    const Expansion core = pivot_expansion(rot_or(x, s[0], ground_.R), vec3_or(x, s[1], ground_.p), x.rot[s[2]],
                                           Vec3(x.vec[s[3]]), r_a_, r_b_, level);
    const auto off = local_offsets();
    out.resize(3, local_dim(), level);
    const bool grounded = s[0] < 0;
    scatter(core,
            column_map({{grounded ? -1 : off[0], 3}, {grounded ? -1 : off[1], 3}, {off[2], 3}, {off[3], 3}}), 0,
            level, out);
  }

  AxisBlock::AxisBlock(const VariableLayout &layout, int R_a, int R_b, const AxisFrame &frame, GroundPose ground)
      : Block("axis", BlockKind::Equality, 2, {R_a, R_b}, layout), frame_(frame), ground_(std::move(ground))
  {
  }

  void AxisBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const auto s = slots();
    const Expansion core = axis_expansion(rot_or(x, s[0], ground_.R), x.rot[s[1]], frame_, level);
    const auto off = local_offsets();
    out.resize(2, local_dim(), level);
    scatter(core, column_map({{s[0] < 0 ? -1 : off[0], 3}, {off[1], 3}}), 0, level, out);
  }

  PivotWrenchBlock::PivotWrenchBlock(const VariableLayout &layout, int R_a, int R_b, int input, int lambda_offset,
                                     const Vec3 &r_a, const Vec3 &r_b, double dt)
      : Block("pivot_wrench", BlockKind::Equality, R_a < 0 ? 6 : 12, {R_a, R_b, input}, layout),
        lambda_offset_(lambda_offset), r_a_(r_a), r_b_(r_b), dt_(dt), grounded_(R_a < 0)
  {
    if (lambda_offset_ < 0 || lambda_offset_ + 3 > layout.slot(input).dim)
    {
      throw std::invalid_argument("PivotWrenchBlock: multiplier range outside input slot");
    }
  }

  void PivotWrenchBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const auto s = slots();
    const auto off = local_offsets();
    const Vec3 lambda = x.vec[s[2]].segment<3>(lambda_offset_);
    const int lam_col = off[2] + lambda_offset_;
    out.resize(dim(), local_dim(), level);

    // Virtual work of lambda . c: body-frame torque (dc/dxi)^T lambda and
    // world force (dc/dp)^T lambda, entering the residual as -dt^2 T and -dt f.
    int row = 0;
    if (!grounded_)
    {
      Expansion Ta = pivot_torque_expansion(x.rot[s[0]], r_a_, lambda, level);
      scale(Ta, -dt_ * dt_);
      scatter(Ta, column_map({{off[0], 3}, {lam_col, 3}}), 0, level, out);
      out.value.segment<3>(3) -= dt_ * lambda;
      if (wants_gradient(level))
      {
        out.jacobian.block(3, lam_col, 3, 3) -= dt_ * Mat3::Identity();
      }
      row = 6;
    }
    Expansion Tb = pivot_torque_expansion(x.rot[s[1]], r_b_, lambda, level);
    scale(Tb, dt_ * dt_);
    scatter(Tb, column_map({{off[1], 3}, {lam_col, 3}}), row, level, out);
    out.value.segment<3>(row + 3) += dt_ * lambda;
    if (wants_gradient(level))
    {
      out.jacobian.block(row + 3, lam_col, 3, 3) += dt_ * Mat3::Identity();
    }
  }

  AxisWrenchBlock::AxisWrenchBlock(const VariableLayout &layout, int R_a, int R_b, int input, int lambda_offset,
                                   const AxisFrame &frame, double dt, GroundPose ground)
      : Block("axis_wrench", BlockKind::Equality, R_a < 0 ? 3 : 6, {R_a, R_b, input}, layout),
        lambda_offset_(lambda_offset), frame_(frame), dt_(dt), ground_(std::move(ground))
  {
    if (lambda_offset_ < 0 || lambda_offset_ + 2 > layout.slot(input).dim)
    {
      throw std::invalid_argument("AxisWrenchBlock: multiplier range outside input slot");
    }
  }

  void AxisWrenchBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const auto s = slots();
    const auto off = local_offsets();
    const bool grounded = s[0] < 0;
    const Rotation &Ra = rot_or(x, s[0], ground_.R);
    const Eigen::Vector2d lambda = x.vec[s[2]].segment<2>(lambda_offset_);
    const auto cols = column_map({{grounded ? -1 : off[0], 3}, {off[1], 3}, {off[2] + lambda_offset_, 2}});
    out.resize(dim(), local_dim(), level);
    int row = 0;
    if (!grounded)
    {
      Expansion Ta = axis_torque_expansion(Ra, x.rot[s[1]], frame_, lambda, true, level);
      scale(Ta, -dt_ * dt_);
      scatter(Ta, cols, 0, level, out);
      row = 3;
    }
    Expansion Tb = axis_torque_expansion(Ra, x.rot[s[1]], frame_, lambda, false, level);
    scale(Tb, -dt_ * dt_);
    scatter(Tb, cols, row, level, out);
  }

  JointTorqueBlock::JointTorqueBlock(const VariableLayout &layout, int input, int index, bool has_parent,
                                     const Vec3 &axis_parent, const Vec3 &axis_child, double dt)
      : Block("actuation", BlockKind::Equality, has_parent ? 6 : 3, {input}, layout), index_(index),
        has_parent_(has_parent), a_(axis_parent), w_(axis_child), dt_(dt)
  {
    if (index_ < 0 || index_ >= layout.slot(input).dim)
    {
      throw std::invalid_argument("JointTorqueBlock: torque index outside input slot");
    }
  }

  void JointTorqueBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const double tau = x.vec[slots()[0]][index_];
    const double h2 = dt_ * dt_;
    out.resize(dim(), local_dim(), level);
    int row = 0;
    if (has_parent_)
    {
      out.value.segment<3>(0) = h2 * tau * a_;
      if (wants_gradient(level))
      {
        out.jacobian.block(0, index_, 3, 1) = h2 * a_;
      }
      row = 3;
    }
    out.value.segment<3>(row) = -h2 * tau * w_;
    if (wants_gradient(level))
    {
      out.jacobian.block(row, index_, 3, 1) = -h2 * w_;
    }
  }

  InitialRotationBlock::InitialRotationBlock(const VariableLayout &layout, int R, const Rotation &target)
      : Block("initial_rotation", BlockKind::Equality, 3, {R}, layout), target_(target)
  {
  }

  void InitialRotationBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    out.resize(3, 3, level);
    out.value = (target_.inverse() * x.rot[slots()[0]]).log();
    if (wants_gradient(level))
    {
      out.jacobian = Eigen::MatrixXd::Identity(3, 3);
    }
  }

  Eigen::VectorXd InitialRotationBlock::curve_value(const Point &base, const Point &moved) const
  {
    const int s = slots()[0];
    const Rotation Ybar = target_.inverse() * base.rot[s];
    return Ybar.log() + (Ybar.inverse() * target_.inverse() * moved.rot[s]).log();
  }

  InitialVectorBlock::InitialVectorBlock(const VariableLayout &layout, int slot, Eigen::VectorXd target)
      : Block("initial_vector", BlockKind::Equality, static_cast<int>(target.size()), {slot}, layout),
        target_(std::move(target))
  {
    if (layout.slot(slot).dim != target_.size())
    {
      throw std::invalid_argument("InitialVectorBlock: target size does not match slot");
    }
  }

  void InitialVectorBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    out.resize(dim(), dim(), level);
    out.value = x.vec[slots()[0]] - target_;
    if (wants_gradient(level))
    {
      out.jacobian.setIdentity();
    }
  }

  ObstacleBlock::ObstacleBlock(const VariableLayout &layout, int p, const Eigen::Vector2d &center, double radius)
      : Block("obstacle", BlockKind::Inequality, 1, {p}, layout), center_(center), radius_(radius)
  {
  }

  void ObstacleBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    const Vec3 p = x.vec[slots()[0]];
    out.resize(1, 3, level);
    out.value[0] = obstacle_residual(p, center_, radius_);
    if (wants_gradient(level))
    {
      out.jacobian(0, 0) = -2.0 * (p.x() - center_.x());
      out.jacobian(0, 1) = -2.0 * (p.y() - center_.y());
    }
    if (wants_hessian(level))
    {
      out.hessians[0](0, 0) = -2.0;
      out.hessians[0](1, 1) = -2.0;
    }
  }

  namespace
  {
    int finite_count(const Eigen::VectorXd &v)
    {
      return static_cast<int>(std::count_if(v.data(), v.data() + v.size(), [](double a)
                                            { return std::isfinite(a); }));
    }
  } // namespace

  BoxBlock::BoxBlock(const VariableLayout &layout, int input, Eigen::VectorXd lo, Eigen::VectorXd hi)
      : Block("box", BlockKind::Inequality, finite_count(lo) + finite_count(hi), {input}, layout),
        lo_(std::move(lo)), hi_(std::move(hi))
  {
    if (lo_.size() != layout.slot(input).dim || hi_.size() != layout.slot(input).dim)
    {
      throw std::invalid_argument("BoxBlock: bounds do not match input slot");
    }
  }

  void BoxBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    out = box_bounds(x.vec[slots()[0]], lo_, hi_, level);
  }

  FaultInjectedBlock::FaultInjectedBlock(BlockPtr inner, int row, int col, double delta)
      : Block(*inner),
        inner_(std::move(inner)), row_(row), col_(col), delta_(delta)
  {
  }

  void FaultInjectedBlock::evaluate(const Point &x, EvalLevel level, Expansion &out) const
  {
    inner_->evaluate(x, level, out);
    if (wants_gradient(level))
    {
      out.jacobian(row_, col_) += delta_;
    }
  }

  Eigen::VectorXd FaultInjectedBlock::curve_value(const Point &base, const Point &moved) const
  {
    return inner_->curve_value(base, moved);
  }

  // ---------------------------------------------------------------------------

  FdCheckResult fd_check(const Block &block, const Point &x, int trials, std::mt19937_64 &rng,
                         const FdCheckOptions &options)
  {
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    constexpr double kNoiseFactor = 64.0;

    const int n = block.local_dim();
    FdCheckResult result;
    if (n == 0 || block.dim() == 0)
    {
      return result;
    }
    Expansion e;
    block.evaluate(x, EvalLevel::Hessian, e);
    const Eigen::VectorXd r0 = block.curve_value(x, x);

    std::normal_distribution<double> normal(0.0, 1.0);
    auto relative = [](const Eigen::VectorXd &analytic, const Eigen::VectorXd &fd, double noise)
    {
      const double diff = (analytic - fd).lpNorm<Eigen::Infinity>();
      if (diff <= noise)
      {
        return 0.0;
      }
      const double scale = std::max({analytic.lpNorm<Eigen::Infinity>(), fd.lpNorm<Eigen::Infinity>(), 1.0});
      return diff / scale;
    };

    for (int t = 0; t < trials; ++t)
    {
      // Coordinate directions first so every Jacobian column is probed.
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      if (t < n)
      {
        d[t] = 1.0;
      }
      else
      {
        for (int i = 0; i < n; ++i)
        {
          d[i] = normal(rng);
        }
        d.normalize();
      }

      const double hg = options.gradient_step;
      const Eigen::VectorXd gp = block.curve_value(x, block.retract_local(x, hg * d));
      const Eigen::VectorXd gm = block.curve_value(x, block.retract_local(x, -hg * d));
      const double gscale = std::max({gp.lpNorm<Eigen::Infinity>(), gm.lpNorm<Eigen::Infinity>(), 1.0});
      result.gradient_error = std::max(
          result.gradient_error, relative(e.first_order(d), (gp - gm) / (2.0 * hg), kNoiseFactor * kEps * gscale / hg));

      const double hh = options.hessian_step;
      const Eigen::VectorXd hp = block.curve_value(x, block.retract_local(x, hh * d));
      const Eigen::VectorXd hm = block.curve_value(x, block.retract_local(x, -hh * d));
      const double hscale = std::max({hp.lpNorm<Eigen::Infinity>(), hm.lpNorm<Eigen::Infinity>(),
                                      r0.lpNorm<Eigen::Infinity>(), 1.0});
      const Eigen::VectorXd fd2 = (hp - 2.0 * r0 + hm) / (hh * hh);
      result.hessian_error = std::max(result.hessian_error, relative(2.0 * e.second_order(d), fd2,
                                                                     kNoiseFactor * kEps * hscale / (hh * hh)));
    }
    return result;
  }

} // namespace lgtraj
