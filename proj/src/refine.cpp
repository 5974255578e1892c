#include "wavepose/refine.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace wavepose {

namespace {

// 2x3 derivative of the plane projection w -> (w_x/w_z, w_y/w_z).
Eigen::Matrix<double, 2, 3> projection_jacobian(const Vec3& w) {
  Eigen::Matrix<double, 2, 3> j;
  const double z = w.z();
  j << 1.0 / z, 0.0, -w.x() / (z * z),
       0.0, 1.0 / z, -w.y() / (z * z);
  return j;
}

Vec2 plane_project(const Vec3& w, int path, const char* side) {
  if (w.z() <= kFrontEps) {
    throw FrontalityError("path " + std::to_string(path) + " behind the " +
                          side + " plane");
  }
  return Vec2(w.x() / w.z(), w.y() / w.z());
}

// Pose block of d(world_to_frame(x))/d(eps) under T <- exp(eps^) T.
Eigen::Matrix<double, 3, 6> frame_point_pose_jacobian(const Vec3& q) {
  Eigen::Matrix<double, 3, 6> j;
  j.leftCols<3>() = Mat3::Identity();
  j.rightCols<3>() = -skew(q);
  return j;
}

struct PathGeometry {
  Vec3 p_world;  // scatter position (or receive position for the LoS path)
  Vec3 q_local;  // the same point in the receive frame
};

int path_count(const SlamParameters& p, bool los) {
  return static_cast<int>(p.scatterers.size()) + (los ? 1 : 0);
}

}  // namespace

WeightSpec WeightSpec::uniform(int paths) {
  WeightSpec w;
  w.w_nu.assign(paths, 1.0);
  w.w_v.assign(paths, 1.0);
  w.w_tau.assign(paths, 1.0);
  return w;
}

WeightSpec WeightSpec::from_gains(const std::vector<double>& gain_mags,
                                  double toa_weight) {
  WeightSpec w;
  for (double g : gain_mags) {
    const double g2 = g * g;
    w.w_nu.push_back(g2);
    w.w_v.push_back(g2);
    w.w_tau.push_back(g2 * toa_weight);
  }
  return w;
}

Eigen::VectorXd WeightSpec::diagonal() const {
  const int n = paths();
  Eigen::VectorXd d(5 * n);
  for (int l = 0; l < n; ++l) {
    d(5 * l + 0) = w_nu[l];
    d(5 * l + 1) = w_nu[l];
    d(5 * l + 2) = w_v[l];
    d(5 * l + 3) = w_v[l];
    d(5 * l + 4) = w_tau[l];
  }
  return d;
}

void WeightSpec::validate() const {
  if (w_nu.size() != w_v.size() || w_nu.size() != w_tau.size()) {
    throw ConfigError("weight vectors have mismatched lengths");
  }
  for (size_t l = 0; l < w_nu.size(); ++l) {
    if (w_nu[l] < 0.0 || w_v[l] < 0.0 || w_tau[l] < 0.0) {
      throw ConfigError("negative weight at path " + std::to_string(l));
    }
    if (w_nu[l] == 0.0 && w_v[l] == 0.0 && w_tau[l] == 0.0) {
      throw ConfigError("path " + std::to_string(l) + " has no positive weight");
    }
  }
}

Eigen::VectorXd predict_observations(const SlamParameters& p,
                                     const DifferenceMatrix& d, bool los) {
  const int n = path_count(p, los);
  if (d.size() != n) {
    throw ConfigError("difference matrix size does not match path count");
  }

  const Pose& pose = p.pose;
  Eigen::VectorXd tau(n);
  Eigen::VectorXd mu(5 * n);

  for (int l = 0; l < n; ++l) {
    const bool is_los = los && l == 0;
    const Vec3 pw = is_los ? pose.trans : p.scatterers[l - (los ? 1 : 0)];
    const Vec3 ql = is_los ? pose.world_to_frame(Vec3::Zero())
                           : pose.world_to_frame(pw);
    mu.segment<2>(5 * l) = plane_project(pw, l, "transmit");
    mu.segment<2>(5 * l + 2) = plane_project(ql, l, "receive");
    tau(l) = (is_los ? ql.norm() : pw.norm() + ql.norm()) / kSpeedOfLight;
  }

  const Eigen::VectorXd dtau = d.matrix() * tau;
  for (int l = 0; l < n; ++l) mu(5 * l + 4) = dtau(l);
  return mu;
}

Eigen::VectorXd stack_observations(const std::vector<PathObservation>& obs,
                                   const DifferenceMatrix& d) {
  const int n = static_cast<int>(obs.size());
  if (d.size() != n) {
    throw ConfigError("difference matrix size does not match path count");
  }
  Eigen::VectorXd tau(n);
  for (int l = 0; l < n; ++l) tau(l) = obs[l].tau;
  const Eigen::VectorXd dtau = d.matrix() * tau;

  Eigen::VectorXd y(5 * n);
  for (int l = 0; l < n; ++l) {
    y.segment<2>(5 * l) = obs[l].nu.v;
    y.segment<2>(5 * l + 2) = obs[l].v.v;
    y(5 * l + 4) = dtau(l);
  }
  return y;
}

Eigen::MatrixXd jacobian(const SlamParameters& p, const DifferenceMatrix& d,
                         bool los) {
  const int n = path_count(p, los);
  if (d.size() != n) {
    throw ConfigError("difference matrix size does not match path count");
  }
  const int num_scatter = static_cast<int>(p.scatterers.size());
  const int cols = 6 + 3 * num_scatter;
  const Pose& pose = p.pose;
  const Mat3 r_t = pose.rot.matrix().transpose();

  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(5 * n, cols);
  Eigen::MatrixXd tau_grad = Eigen::MatrixXd::Zero(n, cols);

  for (int l = 0; l < n; ++l) {
    const bool is_los = los && l == 0;
    const int k = l - (los ? 1 : 0);  // scatterer index
    const Vec3 pw = is_los ? pose.trans : p.scatterers[k];
    const Vec3 ql = is_los ? pose.world_to_frame(Vec3::Zero())
                           : pose.world_to_frame(pw);
    if (pw.z() <= kFrontEps || ql.z() <= kFrontEps) {
      throw FrontalityError("path " + std::to_string(l) +
                            " behind a virtual plane");
    }

    const auto dproj_tx = projection_jacobian(pw);
    const auto dproj_rx = projection_jacobian(ql);
    const auto pose_block_rx = frame_point_pose_jacobian(ql);

    if (is_los) {
      // Transmit-side view of the receive position; the position moves as
      // [-R | 0] under a left perturbation of the transform.
      Eigen::Matrix<double, 3, 6> dpos = Eigen::Matrix<double, 3, 6>::Zero();
      dpos.leftCols<3>() = -pose.rot.matrix();
      j.block<2, 6>(5 * l, 0) = dproj_tx * dpos;
      j.block<2, 6>(5 * l + 2, 0) = dproj_rx * pose_block_rx;
      tau_grad.block<1, 6>(l, 0) =
          ql.normalized().transpose() * pose_block_rx / kSpeedOfLight;
      continue;
    }

    // Departure virtual point: depends only on the scatter position.
    j.block<2, 3>(5 * l, 6 + 3 * k) = dproj_tx;
    // Arrival virtual point: pose and own-scatterer blocks.
    j.block<2, 6>(5 * l + 2, 0) = dproj_rx * pose_block_rx;
    j.block<2, 3>(5 * l + 2, 6 + 3 * k) = dproj_rx * r_t;
    // Delay.
    tau_grad.block<1, 6>(l, 0) =
        ql.normalized().transpose() * pose_block_rx / kSpeedOfLight;
    tau_grad.block<1, 3>(l, 6 + 3 * k) =
        (pw.normalized().transpose() + ql.normalized().transpose() * r_t) /
        kSpeedOfLight;
  }

  const Eigen::MatrixXd dtau_grad = d.matrix() * tau_grad;
  for (int l = 0; l < n; ++l) j.row(5 * l + 4) = dtau_grad.row(l);
  return j;
}

double slam_objective(const SlamParameters& p, const Eigen::VectorXd& y,
                      const WeightSpec& w, const DifferenceMatrix& d,
                      bool los) {
  const Eigen::VectorXd r = y - predict_observations(p, d, los);
  return r.dot(w.diagonal().cwiseProduct(r));
}

namespace {

struct Direction {
  Eigen::VectorXd delta;  // 6 + 3L
  double gradient_norm = 0.0;
};

Direction gn_direction(const SlamParameters& p, const Eigen::VectorXd& y,
                       const WeightSpec& w, const DifferenceMatrix& d,
                       bool los) {
  const Eigen::MatrixXd j = jacobian(p, d, los);
  const Eigen::VectorXd wd = w.diagonal();
  const Eigen::VectorXd r = y - predict_observations(p, d, los);

  const Eigen::MatrixXd jtw = j.transpose() * wd.asDiagonal();
  Eigen::MatrixXd h = jtw * j;
  const Eigen::VectorXd g = jtw * r;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  const Eigen::VectorXd diag = ldlt.vectorD().cwiseAbs();
  const double dmax = diag.maxCoeff();
  const double dmin = diag.minCoeff();
  if (!(dmax > 0.0) || dmin < 1e-14 * dmax || ldlt.info() != Eigen::Success) {
    throw SingularNormalMatrixError(
        "weighted normal matrix is rank deficient (under-determined geometry)");
  }
  if (dmin < 1e-12 * dmax) {
    // Conditioning floor for near-degenerate scatter geometries.
    h.diagonal().array() += 1e-12 * h.trace();
    ldlt.compute(h);
  }

  Direction dir;
  dir.delta = ldlt.solve(g);
  dir.gradient_norm = g.norm();
  return dir;
}

SlamParameters apply_direction(const SlamParameters& p,
                               const Eigen::VectorXd& delta,
                               const StepSizes& kappa) {
  SlamParameters out = p;
  out.pose = apply_update(p.pose, Twist(Vec6(kappa.pose * delta.head<6>())));
  for (size_t k = 0; k < p.scatterers.size(); ++k) {
    out.scatterers[k] += kappa.scatter * delta.segment<3>(6 + 3 * k);
  }
  return out;
}

}  // namespace

SlamParameters gn_step(const SlamParameters& p, const Eigen::VectorXd& y,
                       const WeightSpec& w, const DifferenceMatrix& d,
                       bool los, const StepSizes& kappa) {
  w.validate();
  return apply_direction(p, gn_direction(p, y, w, d, los).delta, kappa);
}

RefineResult refine(const SlamParameters& init, const Eigen::VectorXd& y,
                    const WeightSpec& w, const DifferenceMatrix& d, bool los,
                    const RefineOptions& opts) {
  w.validate();

  SlamParameters current = init;
  double objective = slam_objective(current, y, w, d, los);

  RefineReport report;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Direction dir = gn_direction(current, y, w, d, los);

    double kappa = 1.0;
    bool accepted = false;
    while (kappa >= opts.min_backtrack) {
      SlamParameters cand =
          apply_direction(current, dir.delta, {kappa, kappa});
      double cand_objective;
      try {
        cand_objective = slam_objective(cand, y, w, d, los);
      } catch (const FrontalityError&) {
        kappa *= 0.5;  // stepped out of the valid projection domain
        continue;
      }
      if (cand_objective <= objective) {
        current = std::move(cand);
        objective = cand_objective;
        report.step_norm = kappa * dir.delta.norm();
        accepted = true;
        break;
      }
      kappa *= 0.5;
    }
    report.iterations = it + 1;

    if (!accepted) {
      const double scale = 1.0 + std::abs(objective);
      if (dir.gradient_norm < 1e-6 * scale || dir.delta.norm() < 1e-12) {
        report.converged = true;  // stationary point, nothing to gain
        break;
      }
      throw RefineDivergedError(
          "no descent step found away from stationarity", current);
    }

    if ((it + 1) % 100 == 0) {
      current.pose = current.pose.renormalized();
    }
    if (report.step_norm < opts.step_tolerance) {
      report.converged = true;
      break;
    }
  }

  report.objective = objective;
  return RefineResult{std::move(current), report};
}

}  // namespace wavepose
