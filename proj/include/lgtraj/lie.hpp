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

#ifndef LGTRAJ_LIE_HPP
#define LGTRAJ_LIE_HPP

#include <Eigen/Dense>

#include <span>
#include <utility>
#include <vector>

namespace lgtraj
{
  using Vec3 = Eigen::Vector3d;
  using Mat3 = Eigen::Matrix3d;

  /// Cross-product matrix: hat(v) * w == v.cross(w).
  Mat3 hat(const Vec3 &v);

  /// Inverse of hat. Throws std::invalid_argument when ||M + M^T||_F > 1e-8.
  Vec3 vee(const Mat3 &M);

  /// vee of the skew part, (M - M^T)^vee, without any skewness precondition.
  Vec3 vee_skew(const Mat3 &M);

  /// Element of SO(3).
  ///
  /// Products and retractions re-project onto the group (polar decomposition)
  /// whenever the orthonormality defect ||R^T R - I||_F exceeds 1e-10, so long
  /// chains of updates never drift off the manifold.
  class Rotation
  {
  public:
    Rotation() : m_(Mat3::Identity()) {}

    static Rotation identity() { return Rotation(); }
    static Rotation exp(const Vec3 &phi);

    /// Wraps a matrix that is already a rotation (defect <= 1e-6), projecting
    /// away any residual drift. Throws std::invalid_argument otherwise.
    static Rotation from_matrix(const Mat3 &M);

    /// Nearest rotation in the Frobenius sense.
    static Rotation project(const Mat3 &M);

    const Mat3 &matrix() const { return m_; }
    Rotation inverse() const;
    Vec3 log() const;

    /// R * exp(xi): the retraction used on every rotation slot.
    Rotation retract(const Vec3 &xi) const;

    double orthonormality_defect() const;
    double determinant() const { return m_.determinant(); }

    Rotation operator*(const Rotation &other) const;
    Vec3 operator*(const Vec3 &v) const { return m_ * v; }

  private:
    explicit Rotation(const Mat3 &M) : m_(M) {}
    static Rotation repaired(const Mat3 &M);

    Mat3 m_;
  };

  Rotation exp_so3(const Vec3 &phi);
  Vec3 log_so3(const Rotation &R);

  /// Coordinates of Ad_R(xi^), i.e. R * xi for rotations.
  Vec3 adjoint_rot(const Rotation &R, const Vec3 &xi);

  /// Second-order BCH truncation of log(exp(a) exp(b)).
  Vec3 bch2(const Vec3 &a, const Vec3 &b);

  /// Second-order expansion of log(Ybar^{-1} X_1 exp(t xi_1) ... X_n exp(t xi_n))
  /// about the operating point X_1..X_n, with Ybar = X_1 ... X_n.
  ///
  /// The first-order coefficient is sum_i G_i xi_i with G_i the matrix of
  /// Ad_{X_{i+1,n}^{-1}}. The second-order coefficient is
  /// 1/2 sum_{i<j} [G_i xi_i, G_j xi_j], one bracket per listed pair.
  struct ChainExpansion
  {
    std::vector<Mat3> gradient_maps;
    std::vector<std::pair<int, int>> bracket_pairs;

    Vec3 first_order(std::span<const Vec3> directions) const;
    Vec3 second_order(std::span<const Vec3> directions) const;
  };

  ChainExpansion chain_second_order(std::span<const Rotation> operating_points);

} // namespace lgtraj

#endif // LGTRAJ_LIE_HPP
