#include "wavepose/lie.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace wavepose {

namespace {
constexpr double kOrthoTol = 1e-9;
constexpr double kSmallAngle = 1e-10;
}  // namespace

Mat3 skew(const Vec3& x) {
  Mat3 s;
  s << 0.0, -x.z(), x.y(),
       x.z(), 0.0, -x.x(),
      -x.y(), x.x(), 0.0;
  return s;
}

Mat4 se3_hat(const Twist& t) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = skew(t.rotational());
  m.topRightCorner<3, 1>() = t.translational();
  return m;
}

Eigen::Matrix<double, 4, 6> se3_point_jacobian(const Vec4& p) {
  Eigen::Matrix<double, 4, 6> j = Eigen::Matrix<double, 4, 6>::Zero();
  j.topLeftCorner<3, 3>() = p(3) * Mat3::Identity();
  j.topRightCorner<3, 3>() = -skew(p.head<3>());
  return j;
}

Rotation Rotation::from_matrix(const Mat3& m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  if (ortho > kOrthoTol) {
    throw GeometryError("matrix is not orthonormal (residual " +
                        std::to_string(ortho) + ")");
  }
  if (std::abs(m.determinant() - 1.0) > kOrthoTol) {
    throw GeometryError("matrix determinant is not +1");
  }
  return Rotation(m, unchecked{});
}

Rotation Rotation::project(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return Rotation(r, unchecked{});
}

Rotation exp_so3(const Vec3& u) {
  const double theta = u.norm();
  if (theta < kSmallAngle) {
    // Second-order expansion keeps the result orthonormal to machine precision.
    const Mat3 ux = skew(u);
    return Rotation::project(Mat3::Identity() + ux + 0.5 * ux * ux);
  }
  const Vec3 axis = u / theta;
  const Mat3 ax = skew(axis);
  const Mat3 r = Mat3::Identity() + std::sin(theta) * ax +
                 (1.0 - std::cos(theta)) * ax * ax;
  return Rotation::project(r);
}

Vec3 log_so3(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  const double cos_theta =
      std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(cos_theta);

  if (theta < kSmallAngle) {
    return 0.5 * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  }

  if (theta > M_PI - 1e-6) {
    // Near pi the antisymmetric part vanishes; recover the axis from the
    // largest diagonal column of R + I.
    const Mat3 s = r + Mat3::Identity();
    int k;
    s.diagonal().maxCoeff(&k);
    Vec3 axis = s.col(k) / std::sqrt(2.0 * s(k, k));
    // Fix the sign so that exp(theta * axis) reproduces R's antisymmetric part.
    const Vec3 anti(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    if (anti.dot(axis) < 0.0) axis = -axis;
    return theta * axis;
  }

  const double scale = theta / (2.0 * std::sin(theta));
  return scale *
         Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rot.matrix();
  m.topRightCorner<3, 1>() = trans;
  return m;
}

Mat4 Pose::transform_matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rot.matrix().transpose();
  m.topRightCorner<3, 1>() = -(rot.matrix().transpose() * trans);
  return m;
}

Pose Pose::inverse() const {
  const Rotation rt = rot.transpose();
  return Pose(rt, -(rt * trans));
}

Pose Pose::compose(const Pose& other) const {
  return Pose(rot * other.rot, rot * other.trans + trans);
}

Pose Pose::renormalized() const {
  return Pose(Rotation::project(rot.matrix()), trans);
}

Pose exp_se3(const Twist& t) {
  const Vec3 y = t.translational();
  const Vec3 x = t.rotational();
  // transform = expm(hat) = [exp(x), J_l(x) y; 0, 1]; the pose holds the
  // inverse parameterization.
  const Rotation r_t = exp_so3(x);

  Mat3 jl;
  const double theta = x.norm();
  if (theta < kSmallAngle) {
    jl = Mat3::Identity() + 0.5 * skew(x);
  } else {
    const Mat3 ax = skew(x / theta);
    jl = Mat3::Identity() + ((1.0 - std::cos(theta)) / theta) * ax +
         ((theta - std::sin(theta)) / theta) * ax * ax;
  }
  const Vec3 trans_t = jl * y;

  // Pose (R, r) with T = [R^T, -R^T r]: here T = [r_t, trans_t] so
  // R = r_t^T and r = -R * trans_t.
  const Rotation rot = r_t.transpose();
  return Pose(rot, -(rot * trans_t));
}

Pose apply_update(const Pose& p, const Twist& t) {
  // T_new = expm(hat(t)) T_old  <=>  M_new = M_old * expm(hat(-t)).
  return p.compose(exp_se3(Twist(Vec6(-t.v))));
}

}  // namespace wavepose
