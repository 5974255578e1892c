#include "wavepose/aoa_pose.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace wavepose {

namespace {

// Dense polynomial helpers for the minimal-case quartic, lowest degree first.
using Poly = Eigen::VectorXd;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r = Poly::Zero(a.size() + b.size() - 1);
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < b.size(); ++j) r(i + j) += a(i) * b(j);
  }
  return r;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly r = Poly::Zero(std::max(a.size(), b.size()));
  r.head(a.size()) += a;
  r.head(b.size()) += b;
  return r;
}

// Real roots via the companion-matrix eigenvalues; imaginary parts below
// 1e-8 in magnitude count as real.
std::vector<double> companion_real_roots(const Poly& p) {
  int deg = static_cast<int>(p.size()) - 1;
  const double lead_scale = p.cwiseAbs().maxCoeff();
  while (deg > 0 && std::abs(p(deg)) < 1e-14 * lead_scale) --deg;
  if (deg < 1) return {};

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -p(i) / p(deg);
  comp.bottomLeftCorner(deg - 1, deg - 1).setIdentity();

  Eigen::EigenSolver<Eigen::MatrixXd> eig(comp);
  std::vector<double> roots;
  for (int i = 0; i < deg; ++i) {
    if (std::abs(eig.eigenvalues()(i).imag()) < 1e-8) {
      roots.push_back(eig.eigenvalues()(i).real());
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Rigid transform mapping world points onto camera points (q = R p + t).
std::pair<Mat3, Vec3> fit_rigid(const std::array<Vec3, 3>& world,
                                const std::array<Vec3, 3>& camera) {
  const Vec3 cw = (world[0] + world[1] + world[2]) / 3.0;
  const Vec3 cc = (camera[0] + camera[1] + camera[2]) / 3.0;
  Mat3 h = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    h += (world[i] - cw) * (camera[i] - cc).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixV() * svd.matrixU().transpose();
  if (r.determinant() < 0.0) {
    Mat3 v = svd.matrixV();
    v.col(2) *= -1.0;
    r = v * svd.matrixU().transpose();
  }
  return {r, cc - r * cw};
}

double reprojection_cost(const Pose& pose,
                         const std::vector<BsCorrespondence>& c,
                         const std::vector<double>& weights) {
  double cost = 0.0;
  for (size_t i = 0; i < c.size(); ++i) {
    const Vec3 q = pose.world_to_frame(c[i].bs_pos);
    if (q.z() <= kFrontEps) return std::numeric_limits<double>::infinity();
    const Vec2 proj(q.x() / q.z(), q.y() / q.z());
    const double w = weights.empty() ? 1.0 : weights[i];
    cost += w * (c[i].v.v - proj).squaredNorm();
  }
  return cost;
}

double max_residual(const Pose& pose, const std::vector<BsCorrespondence>& c) {
  double worst = 0.0;
  for (const auto& corr : c) {
    const Vec3 q = pose.world_to_frame(corr.bs_pos);
    if (q.z() <= kFrontEps) return std::numeric_limits<double>::infinity();
    const Vec2 proj(q.x() / q.z(), q.y() / q.z());
    worst = std::max(worst, (corr.v.v - proj).norm());
  }
  return worst;
}

}  // namespace

std::vector<Pose> p3p_solve(const std::vector<BsCorrespondence>& c) {
  if (c.size() != 3) {
    throw InsufficientDataError("p3p_solve requires exactly 3 correspondences");
  }
  const Vec3 p1 = c[0].bs_pos, p2 = c[1].bs_pos, p3 = c[2].bs_pos;
  const double spread = (p2 - p1).cross(p3 - p1).norm();
  const double scale2 = std::max({(p2 - p1).squaredNorm(),
                                  (p3 - p1).squaredNorm(),
                                  (p3 - p2).squaredNorm()});
  if (spread < 1e-10 * scale2) {
    throw DegeneracyError("transmit positions are collinear");
  }

  const std::array<Vec3, 3> f = {c[0].v.homogeneous().normalized(),
                                 c[1].v.homogeneous().normalized(),
                                 c[2].v.homogeneous().normalized()};
  const double a2 = (p2 - p3).squaredNorm();
  const double b2 = (p1 - p3).squaredNorm();
  const double c2 = (p1 - p2).squaredNorm();
  const double cos_a = f[1].dot(f[2]);
  const double cos_b = f[0].dot(f[2]);
  const double cos_g = f[0].dot(f[1]);

  // Law-of-cosines system in the distance ratios u = d2/d1, v = d3/d1:
  //   u^2 + v^2 - 2 u v cos_a = (a2/b2)(1 + v^2 - 2 v cos_b)
  //   1  + u^2 - 2 u  cos_g   = (c2/b2)(1 + v^2 - 2 v cos_b)
  // Eliminating u yields a quartic in v.
  const double ab = a2 / b2;
  const double cb = c2 / b2;

  Poly base(3);  // 1 + v^2 - 2 v cos_b
  base << 1.0, -2.0 * cos_b, 1.0;
  Poly n_poly = poly_add((ab - cb) * base, Poly(Eigen::Vector3d(1.0, 0.0, -1.0)));
  Poly d_poly(2);
  d_poly << 2.0 * cos_g, -2.0 * cos_a;

  const Poly d2 = poly_mul(d_poly, d_poly);
  Poly quartic = poly_add(d2, poly_mul(n_poly, n_poly));
  quartic = poly_add(quartic, -2.0 * cos_g * poly_mul(n_poly, d_poly));
  quartic = poly_add(quartic, -cb * poly_mul(base, d2));

  std::vector<Pose> out;
  for (double v : companion_real_roots(quartic)) {
    if (v <= 0.0) continue;
    const double denom = d_poly(0) + d_poly(1) * v;
    if (std::abs(denom) < 1e-12) continue;
    const double u =
        (n_poly(0) + n_poly(1) * v + n_poly(2) * v * v) / denom;
    if (u <= 0.0) continue;
    const double w = 1.0 + v * v - 2.0 * v * cos_b;
    if (w <= 0.0) continue;
    const double d1 = std::sqrt(b2 / w);

    const std::array<Vec3, 3> camera = {d1 * f[0], d1 * u * f[1],
                                        d1 * v * f[2]};
    const auto [rt, tt] = fit_rigid({p1, p2, p3}, camera);
    const Rotation rot = Rotation::project(rt.transpose());
    Pose pose(rot, -(rot * tt));

    // Polish so every returned candidate interpolates the three inputs to
    // machine precision, then drop spurious root leakage.
    try {
      pose = pose_refine_reprojection(pose, c, {}, {20, 1e-14, 1e-16}).pose;
    } catch (const Error&) {
      continue;
    }
    if (max_residual(pose, c) > 1e-9) continue;

    bool dup = false;
    for (const auto& prev : out) {
      if ((prev.trans - pose.trans).norm() < 1e-6 &&
          log_so3(prev.rot.transpose() * pose.rot).norm() < 1e-6) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(pose);
  }
  return out;
}

ReprojectionResult pose_refine_reprojection(
    const Pose& init, const std::vector<BsCorrespondence>& c,
    const std::vector<double>& weights, const ReprojectionOptions& opts) {
  if (c.size() < 3) {
    throw InsufficientDataError("pose refinement needs >= 3 correspondences");
  }
  if (!weights.empty() && weights.size() != c.size()) {
    throw ConfigError("weights size mismatch");
  }

  const int n = static_cast<int>(c.size());
  Pose pose = init;
  double objective = reprojection_cost(pose, c, weights);
  if (!std::isfinite(objective)) {
    throw NonConvergenceError("initial pose projects a point behind the plane");
  }

  ReprojectionResult result;
  double damping = 0.0;
  bool step_converged = false;

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    Eigen::MatrixXd j(2 * n, 6);
    Eigen::VectorXd r(2 * n);
    Eigen::VectorXd wv = Eigen::VectorXd::Ones(2 * n);
    for (int i = 0; i < n; ++i) {
      const Vec3 q = pose.world_to_frame(c[i].bs_pos);
      Eigen::Matrix<double, 2, 3> dp;
      dp << 1.0 / q.z(), 0.0, -q.x() / (q.z() * q.z()),
            0.0, 1.0 / q.z(), -q.y() / (q.z() * q.z());
      Eigen::Matrix<double, 3, 6> pb;
      pb.leftCols<3>() = Mat3::Identity();
      pb.rightCols<3>() = -skew(q);
      j.block<2, 6>(2 * i, 0) = dp * pb;
      r.segment<2>(2 * i) = c[i].v.v - Vec2(q.x() / q.z(), q.y() / q.z());
      if (!weights.empty()) {
        wv.segment<2>(2 * i).setConstant(weights[i]);
      }
    }

    const Eigen::Matrix<double, 6, Eigen::Dynamic> jtw =
        j.transpose() * wv.asDiagonal();
    const Vec6 g = jtw * r;
    result.gradient_norm = g.norm();
    if (result.gradient_norm < opts.gradient_tolerance) break;

    const Eigen::Matrix<double, 6, 6> h = jtw * j;
    {
      const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> probe(h);
      const Eigen::VectorXd diag = probe.vectorD().cwiseAbs();
      if (!(diag.maxCoeff() > 0.0) ||
          diag.minCoeff() < 1e-14 * diag.maxCoeff()) {
        throw DegeneracyError("reprojection normal matrix is rank deficient");
      }
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      Eigen::Matrix<double, 6, 6> hd = h;
      hd.diagonal() *= (1.0 + damping);
      const Vec6 delta = hd.ldlt().solve(g);
      const Pose cand = apply_update(pose, Twist(delta));
      const double cand_obj = reprojection_cost(cand, c, weights);
      if (cand_obj <= objective) {
        pose = cand;
        objective = cand_obj;
        damping *= 0.25;
        accepted = true;
        step_converged = delta.norm() < opts.step_tolerance;
      } else {
        damping = (damping == 0.0) ? 1e-6 : damping * 10.0;
      }
    }
    if (!accepted) {
      if (result.gradient_norm < 1e2 * opts.gradient_tolerance) break;
      throw NonConvergenceError("damping exhausted without descent");
    }
    if (step_converged) {
      ++it;
      break;
    }
  }

  result.iterations = it;
  result.hit_iteration_cap =
      it >= opts.max_iterations && result.gradient_norm > opts.gradient_tolerance;
  result.pose = pose;
  result.objective = objective;
  return result;
}

Pose pnp_solve(const std::vector<BsCorrespondence>& c) {
  const int n = static_cast<int>(c.size());
  if (n < 3) {
    throw InsufficientDataError("pnp_solve needs at least 3 correspondences");
  }

  if (n == 3) {
    auto candidates = p3p_solve(c);
    if (candidates.size() == 1) return candidates[0];
    throw InsufficientDataError(
        "three correspondences are ambiguous; use p3p_solve");
  }

  // Rank triples by spanned area, then take the first non-degenerate solve.
  struct Triple {
    int i, j, k;
    double area;
  };
  std::vector<Triple> triples;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        const double area = (c[j].bs_pos - c[i].bs_pos)
                                .cross(c[k].bs_pos - c[i].bs_pos)
                                .norm();
        triples.push_back({i, j, k, area});
      }
    }
  }
  std::sort(triples.begin(), triples.end(),
            [](const Triple& a, const Triple& b) { return a.area > b.area; });

  std::vector<Pose> candidates;
  for (const auto& t : triples) {
    try {
      candidates = p3p_solve({c[t.i], c[t.j], c[t.k]});
    } catch (const DegeneracyError&) {
      continue;
    }
    if (!candidates.empty()) break;
  }
  if (candidates.empty()) {
    throw DegeneracyError("no usable minimal subset found");
  }

  double best_cost = std::numeric_limits<double>::infinity();
  const Pose* best = nullptr;
  for (const auto& cand : candidates) {
    const double cost = reprojection_cost(cand, c, {});
    if (cost < best_cost) {
      best_cost = cost;
      best = &cand;
    }
  }
  if (!best) {
    throw DegeneracyError("every candidate places a transmit behind the plane");
  }
  return pose_refine_reprojection(*best, c).pose;
}

}  // namespace wavepose
