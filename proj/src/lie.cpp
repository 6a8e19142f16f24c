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

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lgtraj
{
  namespace
  {
    constexpr double kSkewTolerance = 1e-8;
    constexpr double kRepairThreshold = 1e-10;
    constexpr double kSmallAngle = 1e-4;
    constexpr double kNearPiTrace = -1.0 + 1e-6;
  } // namespace

  Mat3 hat(const Vec3 &v)
  {
    Mat3 M;
    M << 0.0, -v.z(), v.y(),
        v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return M;
  }

  Vec3 vee(const Mat3 &M)
  {
    if ((M + M.transpose()).norm() > kSkewTolerance)
    {
      throw std::invalid_argument("vee: matrix is not skew-symmetric");
    }
    return Vec3(M(2, 1), M(0, 2), M(1, 0));
  }

  Vec3 vee_skew(const Mat3 &M)
  {
    return Vec3(M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1));
  }

  Rotation Rotation::exp(const Vec3 &phi)
  {
    const double theta2 = phi.squaredNorm();
    const double theta = std::sqrt(theta2);
    double a; // sin(theta) / theta
    double b; // (1 - cos(theta)) / theta^2
    if (theta < kSmallAngle)
    {
      a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
      b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
    }
    else
    {
      a = std::sin(theta) / theta;
      b = (1.0 - std::cos(theta)) / theta2;
    }
    const Mat3 K = hat(phi);
    return repaired(Mat3::Identity() + a * K + b * K * K);
  }

  Rotation Rotation::from_matrix(const Mat3 &M)
  {
    const double defect = (M.transpose() * M - Mat3::Identity()).norm();
    if (!M.allFinite() || defect > 1e-6 || M.determinant() < 0.0)
    {
      throw std::invalid_argument("Rotation::from_matrix: not an element of SO(3)");
    }
    return repaired(M);
  }

  Rotation Rotation::project(const Mat3 &M)
  {
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 D = Mat3::Identity();
    D(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    return Rotation(svd.matrixU() * D * svd.matrixV().transpose());
  }

  Rotation Rotation::repaired(const Mat3 &M)
  {
    if ((M.transpose() * M - Mat3::Identity()).norm() > kRepairThreshold)
    {
      return project(M);
    }
    return Rotation(M);
  }

  Rotation Rotation::inverse() const { return Rotation(m_.transpose()); }

  double Rotation::orthonormality_defect() const
  {
    return (m_.transpose() * m_ - Mat3::Identity()).norm();
  }

  Rotation Rotation::operator*(const Rotation &other) const
  {
    return repaired(m_ * other.m_);
  }

  Rotation Rotation::retract(const Vec3 &xi) const { return *this * exp(xi); }

  Vec3 Rotation::log() const
  {
    const Vec3 w = 0.5 * vee_skew(m_); // sin(theta) * axis
    const double tr = m_.trace();
    const double cos_theta = std::clamp(0.5 * (tr - 1.0), -1.0, 1.0);
    const double sin_theta = w.norm();
    const double theta = std::atan2(sin_theta, cos_theta);

    if (tr < kNearPiTrace)
    {
      // sin(theta) carries no usable axis information here; recover the axis
      // from the symmetric part  B = cos I + (1 - cos) n n^T.
      const Mat3 B = 0.5 * (m_ + m_.transpose());
      const Mat3 nnT = (B - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
      int col = 0;
      nnT.diagonal().maxCoeff(&col);
      Vec3 axis = nnT.col(col) / std::sqrt(std::max(nnT(col, col), 1e-300));
      axis.normalize();
      if (axis.dot(w) < 0.0)
      {
        axis = -axis;
      }
      return theta * axis;
    }

    if (theta < kSmallAngle)
    {
      const double t2 = theta * theta;
      return (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0) * w;
    }
    return (theta / sin_theta) * w;
  }

  Rotation exp_so3(const Vec3 &phi) { return Rotation::exp(phi); }

  Vec3 log_so3(const Rotation &R) { return R.log(); }

  Vec3 adjoint_rot(const Rotation &R, const Vec3 &xi) { return R * xi; }

  Vec3 bch2(const Vec3 &a, const Vec3 &b) { return a + b + 0.5 * a.cross(b); }

  Vec3 ChainExpansion::first_order(std::span<const Vec3> directions) const
  {
    Vec3 out = Vec3::Zero();
    for (std::size_t i = 0; i < gradient_maps.size(); ++i)
    {
      out += gradient_maps[i] * directions[i];
    }
    return out;
  }

  Vec3 ChainExpansion::second_order(std::span<const Vec3> directions) const
  {
    Vec3 out = Vec3::Zero();
    for (const auto &[i, j] : bracket_pairs)
    {
      out += 0.5 * (gradient_maps[i] * directions[i]).cross(gradient_maps[j] * directions[j]);
    }
    return out;
  }

  ChainExpansion chain_second_order(std::span<const Rotation> operating_points)
  {
    const int n = static_cast<int>(operating_points.size());
    if (n < 1)
    {
      throw std::invalid_argument("chain_second_order: empty chain");
    }
    ChainExpansion out;
    out.gradient_maps.resize(n);
    // Ad_{X_{i+1,n}^{-1}} = X_{i+1,n}^T, accumulated from the tail.
    Mat3 tail = Mat3::Identity();
    for (int i = n - 1; i >= 0; --i)
    {
      out.gradient_maps[i] = tail.transpose();
      tail = operating_points[i].matrix() * tail;
    }
    for (int i = 0; i < n; ++i)
    {
      for (int j = i + 1; j < n; ++j)
      {
        out.bracket_pairs.emplace_back(i, j);
      }
    }
    return out;
  }

} // namespace lgtraj
