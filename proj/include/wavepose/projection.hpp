#ifndef WAVEPOSE_PROJECTION_HPP
#define WAVEPOSE_PROJECTION_HPP

#include "wavepose/lie.hpp"

namespace wavepose {

/// Depth threshold below which geometry counts as on/behind the array plane.
constexpr double kFrontEps = 1e-9;

/// Direction as azimuth/elevation, phi in (-pi, pi], theta in [0, pi].
/// theta is measured from the array boresight (local +z).
struct AzEl {
  double phi = 0.0;
  double theta = 0.0;

  AzEl() = default;
  AzEl(double phi_, double theta_);  // validates ranges
};

/// 2D intersection of a wavefront direction with the unit-focal plane z = 1,
/// expressed in the array's local frame.
struct VirtualPoint {
  Vec2 v = Vec2::Zero();

  VirtualPoint() = default;
  explicit VirtualPoint(const Vec2& p) : v(p) {}
  VirtualPoint(double x, double y) : v(x, y) {}

  Vec3 homogeneous() const { return Vec3(v.x(), v.y(), 1.0); }
};

/// A matched pair of homogeneous image vectors, transmit side first.
/// Regular observations have both entries on the z = 1 plane; synthetic
/// constraint rows (e.g. epipole pins) may use arbitrary 3-vectors.
struct Correspondence {
  Vec3 nu = Vec3::UnitZ();  // transmit-side (departure) image vector
  Vec3 v = Vec3::UnitZ();   // receive-side (arrival) image vector

  Correspondence() = default;
  Correspondence(const Vec3& nu_, const Vec3& v_) : nu(nu_), v(v_) {}
  Correspondence(const VirtualPoint& nu_, const VirtualPoint& v_)
      : nu(nu_.homogeneous()), v(v_.homogeneous()) {}
};

/// Unit wavefront normal for the given angles.
Vec3 azel_to_normal(const AzEl& a);

/// Inverse of azel_to_normal; phi = 0 by convention at theta = 0.
AzEl normal_to_azel(const Vec3& n);

/// Throws FrontalityError when cos(theta) <= kFrontEps.
VirtualPoint azel_to_virtual_point(const AzEl& a);

AzEl virtual_point_to_azel(const VirtualPoint& vp);

/// Perspective projection of a system-frame point onto the pose's virtual
/// plane. Throws FrontalityError for points at/behind the plane and
/// DegeneracyError when x coincides with the pose origin.
VirtualPoint project(const Pose& pose, const Vec3& x);

/// Rank-2 matrix encoding a relative pose up to scale.
class EssentialMatrix {
 public:
  /// Validates the rank-2 / equal-leading-singular-value structure.
  static EssentialMatrix from_matrix(const Mat3& e);

  const Mat3& matrix() const { return e_; }
  /// Frobenius-normalized copy.
  Mat3 normalized() const { return e_ / e_.norm(); }

 private:
  explicit EssentialMatrix(const Mat3& e) : e_(e) {}
  Mat3 e_;
};

/// E = skew(r) * R for the pose (R, r). Throws DegeneracyError on a zero
/// baseline.
EssentialMatrix essential_from_pose(const Pose& pose);

/// Bilinear epipolar form nu_bar^T E v_bar.
double epipolar_residual(const EssentialMatrix& e, const VirtualPoint& nu,
                         const VirtualPoint& v);
double epipolar_residual(const EssentialMatrix& e, const Correspondence& c);

}  // namespace wavepose

#endif  // WAVEPOSE_PROJECTION_HPP
