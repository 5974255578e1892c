#ifndef WAVEPOSE_LIE_HPP
#define WAVEPOSE_LIE_HPP

#include <Eigen/Core>

#include "wavepose/errors.hpp"

namespace wavepose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Skew-symmetric matrix such that skew(x) * y = x cross y.
Mat3 skew(const Vec3& x);

/// Tangent element of a rigid transform, ordered [translational; rotational].
struct Twist {
  Vec6 v = Vec6::Zero();

  Twist() = default;
  explicit Twist(const Vec6& t) : v(t) {}
  Twist(const Vec3& translational, const Vec3& rotational) {
    v << translational, rotational;
  }

  Vec3 translational() const { return v.head<3>(); }
  Vec3 rotational() const { return v.tail<3>(); }
};

/// Maps a twist to its 4x4 matrix form: [skew(rot), trans; 0, 0].
Mat4 se3_hat(const Twist& t);

/// Jacobian of the action of a twist on a homogeneous point:
/// se3_hat(t) * p equals se3_point_jacobian(p) * t.v for all t, p.
Eigen::Matrix<double, 4, 6> se3_point_jacobian(const Vec4& p);

/// Proper rotation matrix. Construction through from_matrix verifies
/// orthonormality and det = +1 to 1e-9.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }
  /// Throws GeometryError if m is not a rotation matrix within tolerance.
  static Rotation from_matrix(const Mat3& m);
  /// Nearest rotation in Frobenius norm (polar projection via SVD).
  static Rotation project(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Rotation transpose() const { return Rotation(m_.transpose(), unchecked{}); }
  Vec3 operator*(const Vec3& x) const { return m_ * x; }
  Rotation operator*(const Rotation& o) const {
    return Rotation(m_ * o.m_, unchecked{});
  }

 private:
  struct unchecked {};
  Rotation(const Mat3& m, unchecked) : m_(m) {}
  Mat3 m_;
};

Rotation exp_so3(const Vec3& u);
/// Rotation vector with norm <= pi. The angle-pi case goes through the
/// symmetric-part branch (axis from the largest diagonal of R + I).
Vec3 log_so3(const Rotation& r);

/// Rigid pose (R, r): coordinates in the pose's own frame map to the system
/// frame as x_sys = R x_local + r. The measurement transform T acts the other
/// way and is exposed as world_to_frame / transform_matrix.
struct Pose {
  Rotation rot;
  Vec3 trans = Vec3::Zero();

  Pose() = default;
  Pose(const Rotation& r, const Vec3& t) : rot(r), trans(t) {}

  static Pose identity() { return Pose(); }

  /// 4x4 [R r; 0 1].
  Mat4 matrix() const;
  /// 4x4 inverse of matrix(): the transform applied to measured points.
  Mat4 transform_matrix() const;

  Vec3 frame_to_world(const Vec3& x) const { return rot * x + trans; }
  Vec3 world_to_frame(const Vec3& x) const {
    return rot.transpose() * (x - trans);
  }

  Pose inverse() const;
  Pose compose(const Pose& other) const;  // this applied after other
  /// Re-orthonormalizes the rotation; call periodically in long update chains.
  Pose renormalized() const;
};

/// Pose whose measurement transform equals the matrix exponential of the
/// twist, i.e. transform_matrix() == expm(se3_hat(t)).
Pose exp_se3(const Twist& t);

/// Left-multiplicative update of the measurement transform:
/// T_new = expm(se3_hat(t)) * T_old.
Pose apply_update(const Pose& p, const Twist& t);

}  // namespace wavepose

#endif  // WAVEPOSE_LIE_HPP
