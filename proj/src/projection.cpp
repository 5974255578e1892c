#include "wavepose/projection.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace wavepose {

AzEl::AzEl(double phi_, double theta_) : phi(phi_), theta(theta_) {
  if (!(phi > -M_PI - 1e-12 && phi <= M_PI + 1e-12)) {
    throw GeometryError("azimuth outside (-pi, pi]");
  }
  if (!(theta >= -1e-12 && theta <= M_PI + 1e-12)) {
    throw GeometryError("elevation outside [0, pi]");
  }
}

Vec3 azel_to_normal(const AzEl& a) {
  const double st = std::sin(a.theta);
  return Vec3(std::cos(a.phi) * st, std::sin(a.phi) * st, std::cos(a.theta));
}

AzEl normal_to_azel(const Vec3& n) {
  const Vec3 u = n.normalized();
  const double theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
  double phi = 0.0;
  if (u.head<2>().norm() > 1e-14) {
    phi = std::atan2(u.y(), u.x());
    if (phi <= -M_PI) phi = M_PI;
  }
  return AzEl(phi, theta);
}

VirtualPoint azel_to_virtual_point(const AzEl& a) {
  const double ct = std::cos(a.theta);
  if (ct <= kFrontEps) {
    throw FrontalityError("direction at or behind the virtual plane");
  }
  const double t = std::tan(a.theta);
  return VirtualPoint(std::cos(a.phi) * t, std::sin(a.phi) * t);
}

AzEl virtual_point_to_azel(const VirtualPoint& vp) {
  const double r = vp.v.norm();
  const double theta = std::atan(r);
  double phi = 0.0;
  if (r > 1e-14) {
    phi = std::atan2(vp.v.y(), vp.v.x());
    if (phi <= -M_PI) phi = M_PI;
  }
  return AzEl(phi, theta);
}

VirtualPoint project(const Pose& pose, const Vec3& x) {
  const Vec3 local = pose.world_to_frame(x);
  if (local.norm() < kFrontEps) {
    throw DegeneracyError("point coincides with the projection center");
  }
  if (local.z() <= kFrontEps) {
    throw FrontalityError("point at or behind the virtual plane");
  }
  return VirtualPoint(local.x() / local.z(), local.y() / local.z());
}

EssentialMatrix EssentialMatrix::from_matrix(const Mat3& e) {
  Eigen::JacobiSVD<Mat3> svd(e);
  const Vec3 s = svd.singularValues();
  if (s(0) <= 0.0) {
    throw DegeneracyError("zero matrix is not an essential matrix");
  }
  if (s(2) >= 1e-6 * s(0)) {
    throw DegeneracyError("matrix is not rank-2 within tolerance");
  }
  if ((s(0) - s(1)) / s(0) >= 1e-6) {
    throw DegeneracyError("leading singular values are not equal");
  }
  return EssentialMatrix(e);
}

EssentialMatrix essential_from_pose(const Pose& pose) {
  if (pose.trans.norm() <= 0.0) {
    throw DegeneracyError("zero baseline: epipolar geometry undefined");
  }
  return EssentialMatrix::from_matrix(skew(pose.trans) * pose.rot.matrix());
}

double epipolar_residual(const EssentialMatrix& e, const VirtualPoint& nu,
                         const VirtualPoint& v) {
  return nu.homogeneous().dot(e.matrix() * v.homogeneous());
}

double epipolar_residual(const EssentialMatrix& e, const Correspondence& c) {
  return c.nu.dot(e.matrix() * c.v);
}

}  // namespace wavepose
