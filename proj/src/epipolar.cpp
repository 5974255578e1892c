#include "wavepose/epipolar.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "wavepose/los_prior.hpp"

namespace wavepose {

namespace {

// ---------------------------------------------------------------------------
// Polynomial arithmetic for the five-point constraint system. Polynomials in
// (x, y, z) are stored as dense coefficient vectors over fixed monomial
// orders:
//   degree 1:  [x, y, z, 1]
//   degree 2:  [x2, xy, xz, y2, yz, z2, x, y, z, 1]
//   degree 3:  [x3, x2y, x2z, xy2, xyz, xz2, y3, y2z, yz2, z3,
//               x2, xy, xz, y2, yz, z2, x, y, z, 1]
// The degree-3 order puts all cubic monomials first so that the Gauss-Jordan
// eliminated system is immediately in [I | B] form over the quotient basis
// (the trailing ten monomials).
// ---------------------------------------------------------------------------

using Poly1 = Eigen::Matrix<double, 4, 1>;
using Poly2 = Eigen::Matrix<double, 10, 1>;
using Poly3 = Eigen::Matrix<double, 20, 1>;

constexpr int kMul11[4][4] = {
    {0, 1, 2, 6},
    {1, 3, 4, 7},
    {2, 4, 5, 8},
    {6, 7, 8, 9},
};

constexpr int kMul21[10][4] = {
    {0, 1, 2, 10},   // x2 * [x y z 1]
    {1, 3, 4, 11},   // xy
    {2, 4, 5, 12},   // xz
    {3, 6, 7, 13},   // y2
    {4, 7, 8, 14},   // yz
    {5, 8, 9, 15},   // z2
    {10, 11, 12, 16},  // x
    {11, 13, 14, 17},  // y
    {12, 14, 15, 18},  // z
    {16, 17, 18, 19},  // 1
};

Poly2 mul11(const Poly1& a, const Poly1& b) {
  Poly2 r = Poly2::Zero();
  for (int i = 0; i < 4; ++i) {
    if (a(i) == 0.0) continue;
    for (int j = 0; j < 4; ++j) {
      r(kMul11[i][j]) += a(i) * b(j);
    }
  }
  return r;
}

Poly3 mul21(const Poly2& a, const Poly1& b) {
  Poly3 r = Poly3::Zero();
  for (int i = 0; i < 10; ++i) {
    if (a(i) == 0.0) continue;
    for (int j = 0; j < 4; ++j) {
      r(kMul21[i][j]) += a(i) * b(j);
    }
  }
  return r;
}

struct NullspaceBasis {
  // Entry polynomials of E(x,y,z) = x E1 + y E2 + z E3 + E4.
  std::array<std::array<Poly1, 3>, 3> entry;
  std::array<Mat3, 4> basis;
};

Mat3 unvec_col_major(const Eigen::Matrix<double, 9, 1>& v) {
  return Eigen::Map<const Mat3>(v.data());
}

// Rows are v_bar^T (kron) nu_bar^T so that row * vec(E) = nu_bar^T E v_bar
// with column-major vec.
Eigen::Matrix<double, Eigen::Dynamic, 9> design_matrix(
    const std::vector<Correspondence>& c) {
  Eigen::Matrix<double, Eigen::Dynamic, 9> a(c.size(), 9);
  for (size_t k = 0; k < c.size(); ++k) {
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 3; ++i) {
        a(static_cast<int>(k), 3 * j + i) = c[k].v(j) * c[k].nu(i);
      }
    }
    const double n = a.row(static_cast<int>(k)).norm();
    if (n > 0.0) a.row(static_cast<int>(k)) /= n;
  }
  return a;
}

NullspaceBasis nullspace_basis(
    const Eigen::Matrix<double, 5, 9>& a) {
  Eigen::JacobiSVD<Eigen::Matrix<double, 5, 9>> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s(4) < 1e-10 * s(0)) {
    throw DegeneracyError("five-point design matrix has rank < 5");
  }
  NullspaceBasis nb;
  for (int k = 0; k < 4; ++k) {
    nb.basis[k] = unvec_col_major(svd.matrixV().col(5 + k));
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      nb.entry[i][j] = Poly1(nb.basis[0](i, j), nb.basis[1](i, j),
                             nb.basis[2](i, j), nb.basis[3](i, j));
    }
  }
  return nb;
}

// Ten cubic constraints: det(E) = 0 and E E^T E - tr(E E^T)/2 E = 0.
Eigen::Matrix<double, 10, 20> constraint_matrix(const NullspaceBasis& nb) {
  Eigen::Matrix<double, 10, 20> m;

  const auto& e = nb.entry;
  auto minor2 = [&](int r0, int c0, int r1, int c1) {
    return Poly2(mul11(e[r0][c0], e[r1][c1]) - mul11(e[r0][c1], e[r1][c0]));
  };

  const Poly3 det = mul21(minor2(1, 1, 2, 2), e[0][0]) -
                    mul21(minor2(1, 0, 2, 2), e[0][1]) +
                    mul21(minor2(1, 0, 2, 1), e[0][2]);
  m.row(0) = det.transpose();

  // Singular-value structure constraint, expanded entry-wise.
  std::array<std::array<Poly2, 3>, 3> eet;
  for (int i = 0; i < 3; ++i) {
    for (int k = i; k < 3; ++k) {
      Poly2 acc = Poly2::Zero();
      for (int j = 0; j < 3; ++j) acc += mul11(e[i][j], e[k][j]);
      eet[i][k] = acc;
      eet[k][i] = acc;
    }
  }
  Poly2 half_trace = 0.5 * (eet[0][0] + eet[1][1] + eet[2][2]);

  int row = 1;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Poly3 acc = Poly3::Zero();
      for (int k = 0; k < 3; ++k) acc += mul21(eet[i][k], e[k][j]);
      acc -= mul21(half_trace, e[i][j]);
      m.row(row++) = acc.transpose();
    }
  }
  return m;
}

struct ScalarRoot {
  double x, y, z;
};

// Eigenvalue (action-matrix) solution of the ten-equation cubic system over
// the quotient basis [x2, xy, xz, y2, yz, z2, x, y, z, 1].
std::vector<ScalarRoot> solve_constraints(
    const Eigen::Matrix<double, 10, 20>& m) {
  const Eigen::Matrix<double, 10, 10> lhs = m.leftCols<10>();
  const Eigen::Matrix<double, 10, 10> rhs = m.rightCols<10>();
  const Eigen::Matrix<double, 10, 10> b = lhs.fullPivLu().solve(rhs);

  // Multiplication by z maps the quotient basis into itself once the
  // eliminated cubic monomials are substituted back.
  Eigen::Matrix<double, 10, 10> action = Eigen::Matrix<double, 10, 10>::Zero();
  action.col(0) = -b.row(2).transpose();  // z * x2  = x2z
  action.col(1) = -b.row(4).transpose();  // z * xy  = xyz
  action.col(2) = -b.row(5).transpose();  // z * xz  = xz2
  action.col(3) = -b.row(7).transpose();  // z * y2  = y2z
  action.col(4) = -b.row(8).transpose();  // z * yz  = yz2
  action.col(5) = -b.row(9).transpose();  // z * z2  = z3
  action(2, 6) = 1.0;                     // z * x   = xz
  action(4, 7) = 1.0;                     // z * y   = yz
  action(5, 8) = 1.0;                     // z * z   = z2
  action(8, 9) = 1.0;                     // z * 1   = z

  Eigen::EigenSolver<Eigen::Matrix<double, 10, 10>> eig(action.transpose());

  constexpr double kImagTol = 1e-8;
  std::vector<ScalarRoot> roots;
  for (int k = 0; k < 10; ++k) {
    if (std::abs(eig.eigenvalues()(k).imag()) > kImagTol) continue;
    const Eigen::Matrix<std::complex<double>, 10, 1> w =
        eig.eigenvectors().col(k);
    const std::complex<double> denom = w(9);
    if (std::abs(denom) < 1e-12) continue;  // solution at infinity
    const std::complex<double> xs = w(6) / denom;
    const std::complex<double> ys = w(7) / denom;
    const std::complex<double> zs = w(8) / denom;
    if (std::abs(xs.imag()) > kImagTol || std::abs(ys.imag()) > kImagTol ||
        std::abs(zs.imag()) > kImagTol) {
      continue;
    }
    roots.push_back({xs.real(), ys.real(), zs.real()});
  }
  return roots;
}

double max_epipolar_residual(const Mat3& e,
                             const std::vector<Correspondence>& c) {
  double worst = 0.0;
  for (const auto& corr : c) {
    const double denom = corr.nu.norm() * (e * corr.v).norm() +
                         corr.v.norm() * (e.transpose() * corr.nu).norm();
    const double r = std::abs(corr.nu.dot(e * corr.v));
    worst = std::max(worst, denom > 1e-300 ? 2.0 * r / denom : r);
  }
  return worst;
}

double trace_constraint_norm(const Mat3& e) {
  return (e * e.transpose() * e - 0.5 * (e * e.transpose()).trace() * e)
      .norm();
}

}  // namespace

DifferenceMatrix DifferenceMatrix::identity(int n) {
  if (n < 1) throw InsufficientDataError("difference matrix needs n >= 1");
  return DifferenceMatrix(Eigen::MatrixXd::Identity(n, n), true);
}

DifferenceMatrix DifferenceMatrix::reference(
    const std::vector<double>& gain_mags) {
  const int n = static_cast<int>(gain_mags.size());
  if (n < 2) {
    throw InsufficientDataError("differencing requires at least two paths");
  }
  int ref = 0, runner_up = -1;
  for (int i = 1; i < n; ++i) {
    if (gain_mags[i] > gain_mags[ref]) ref = i;
  }
  for (int i = 0; i < n; ++i) {
    if (i == ref) continue;
    if (runner_up < 0 || gain_mags[i] > gain_mags[runner_up]) runner_up = i;
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i == ref ? runner_up : ref) -= 1.0;
  }
  return DifferenceMatrix(std::move(d), false);
}

std::vector<EssentialMatrix> five_point(const std::vector<Correspondence>& c) {
  if (c.size() != 5) {
    throw InsufficientDataError("five_point requires exactly 5 correspondences");
  }
  const Eigen::Matrix<double, 5, 9> a = design_matrix(c);
  const NullspaceBasis nb = nullspace_basis(a);
  const auto roots = solve_constraints(constraint_matrix(nb));

  std::vector<EssentialMatrix> out;
  for (const auto& r : roots) {
    Mat3 e = r.x * nb.basis[0] + r.y * nb.basis[1] + r.z * nb.basis[2] +
             nb.basis[3];
    const double norm = e.norm();
    if (norm < 1e-12) continue;
    e /= norm;

    if (max_epipolar_residual(e, c) > 1e-9) continue;
    if (std::abs(e.determinant()) > 1e-9) continue;
    if (trace_constraint_norm(e) > 1e-8) continue;

    // Drop duplicates (repeated eigenvalues give repeated solutions).
    bool dup = false;
    for (const auto& prev : out) {
      const Mat3& p = prev.matrix();
      if ((p - e).norm() < 1e-6 || (p + e).norm() < 1e-6) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(EssentialMatrix::from_matrix(e));
  }
  return out;
}

double sampson_score(const EssentialMatrix& e, const Correspondence& c) {
  const Mat3& m = e.matrix();
  const double r = c.nu.dot(m * c.v);
  const Vec3 ev = m * c.v;
  const Vec3 etn = m.transpose() * c.nu;
  const double denom =
      ev(0) * ev(0) + ev(1) * ev(1) + etn(0) * etn(0) + etn(1) * etn(1);
  if (denom < 1e-30) {
    // Both points sit at the epipoles; consistent iff the form vanishes.
    return r * r < 1e-30 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return r * r / denom;
}

RansacResult ransac_essential(const std::vector<Correspondence>& c,
                              const RansacOptions& opts) {
  const int n = static_cast<int>(c.size());
  if (n < 5) {
    throw InsufficientDataError("ransac_essential requires >= 5 correspondences");
  }

  std::mt19937_64 rng(opts.rng_seed);
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  std::optional<RansacResult> best;
  const int rounds = (n == 5) ? 1 : opts.iterations;

  for (int it = 0; it < rounds; ++it) {
    std::vector<Correspondence> sample;
    if (n == 5) {
      sample = c;
    } else {
      for (int k = 0; k < 5; ++k) {
        std::uniform_int_distribution<int> pick(k, n - 1);
        std::swap(indices[k], indices[pick(rng)]);
      }
      sample = {c[indices[0]], c[indices[1]], c[indices[2]], c[indices[3]],
                c[indices[4]]};
    }

    std::vector<EssentialMatrix> candidates;
    try {
      candidates = five_point(sample);
    } catch (const DegeneracyError&) {
      if (n == 5) throw;
      continue;
    }

    for (const auto& cand : candidates) {
      double total = 0.0;
      std::vector<bool> mask(n);
      int inlier_count = 0;
      for (int i = 0; i < n; ++i) {
        const double s = sampson_score(cand, c[i]);
        total += std::min(s, opts.inlier_threshold);
        mask[i] = s < opts.inlier_threshold;
        if (mask[i]) ++inlier_count;
      }
      if (!best || total < best->total_score) {
        best = RansacResult{cand, std::move(mask), total};
        if (inlier_count >=
            static_cast<int>(std::ceil(opts.early_exit_inlier_fraction * n))) {
          it = rounds;  // finish scoring this hypothesis set, then stop
        }
      }
    }
  }

  if (!best) {
    throw DegeneracyError("no essential-matrix hypothesis survived");
  }
  return *best;
}

Vec3 triangulate(const Rotation& rot, const Vec3& n_r,
                 const Correspondence& c) {
  const Vec3 d_tx = c.nu.normalized();
  const Vec3 d_rx = (rot * c.v).normalized();
  if (d_tx.cross(d_rx).norm() < 1e-12) {
    throw ParallelRaysError("triangulation rays are parallel");
  }

  // Transmit side: [I | 0]; receive side: [R^T | -R^T n_r].
  Eigen::Matrix<double, 3, 4> p_tx = Eigen::Matrix<double, 3, 4>::Zero();
  p_tx.leftCols<3>() = Mat3::Identity();
  Eigen::Matrix<double, 3, 4> p_rx;
  p_rx.leftCols<3>() = rot.matrix().transpose();
  p_rx.col(3) = -(rot.matrix().transpose() * n_r);

  Mat4 a;
  a.row(0) = c.nu(0) * p_tx.row(2) - c.nu(2) * p_tx.row(0);
  a.row(1) = c.nu(1) * p_tx.row(2) - c.nu(2) * p_tx.row(1);
  a.row(2) = c.v(0) * p_rx.row(2) - c.v(2) * p_rx.row(0);
  a.row(3) = c.v(1) * p_rx.row(2) - c.v(2) * p_rx.row(1);
  for (int i = 0; i < 4; ++i) {
    const double n = a.row(i).norm();
    if (n > 0.0) a.row(i) /= n;
  }

  Eigen::JacobiSVD<Mat4> svd(a, Eigen::ComputeFullV);
  const Vec4 h = svd.matrixV().col(3);
  if (std::abs(h(3)) < 1e-12 * h.head<3>().norm()) {
    throw ParallelRaysError("triangulated point at infinity");
  }
  return h.head<3>() / h(3);
}

std::pair<Rotation, Vec3> decompose_essential(
    const EssentialMatrix& e, const std::vector<Correspondence>& inliers) {
  if (inliers.empty()) {
    throw InsufficientDataError(
        "pose disambiguation needs at least one correspondence");
  }

  Eigen::JacobiSVD<Mat3> svd(e.matrix(),
                             Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  if (u.determinant() < 0.0) u.col(2) *= -1.0;
  if (v.determinant() < 0.0) v.col(2) *= -1.0;

  Mat3 w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;

  const std::array<Rotation, 2> rotations = {
      Rotation::project(u * w * v.transpose()),
      Rotation::project(u * w.transpose() * v.transpose())};
  const std::array<Vec3, 2> baselines = {u.col(2), -u.col(2)};

  int best_count = -1;
  std::pair<Rotation, Vec3> best{Rotation::identity(), Vec3::UnitZ()};
  for (const auto& r : rotations) {
    for (const auto& t : baselines) {
      int count = 0;
      for (const auto& corr : inliers) {
        try {
          const Vec3 p = triangulate(r, t, corr);
          const double depth_tx = p.z();
          const double depth_rx = (r.matrix().transpose() * (p - t)).z();
          if (depth_tx > 0.0 && depth_rx > 0.0) ++count;
        } catch (const ParallelRaysError&) {
          // Point on the baseline carries no cheirality information.
        }
      }
      if (count > best_count) {
        best_count = count;
        best = {r, t};
      }
    }
  }

  if (2 * best_count <= static_cast<int>(inliers.size())) {
    throw CheiralityError(
        "no pose candidate places a majority of points in front of both planes");
  }
  return best;
}

double recover_scale(const Eigen::VectorXd& scaled_lengths,
                     const Eigen::VectorXd& delays,
                     const DifferenceMatrix& d) {
  const int n = d.size();
  if (scaled_lengths.size() != n || delays.size() != n) {
    throw InsufficientDataError("scale recovery input sizes disagree");
  }
  if (!d.is_identity() && n < 2) {
    throw InsufficientDataError("differencing needs at least two paths");
  }
  const Eigen::VectorXd dd = d.matrix() * scaled_lengths;
  const Eigen::VectorXd dt = d.matrix() * delays;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(dd(i)) < 1e-12) {
      throw DivisionDegeneracyError(
          "differenced path lengths vanish at index " + std::to_string(i));
    }
    acc += dt(i) / dd(i);
  }
  return kSpeedOfLight * acc / n;
}

namespace {

template <typename Fn>
auto with_phase(const char* phase, Fn&& fn) {
  try {
    return fn();
  } catch (Error& e) {
    e.add_context(phase);
    throw;
  }
}

SlamEstimate slam_all_paths_as_scatterers(
    const std::vector<PathObservation>& obs, const SlamOptions& opts) {
  const int n = static_cast<int>(obs.size());

  std::vector<Correspondence> corr;
  corr.reserve(n);
  for (const auto& o : obs) corr.emplace_back(o.nu, o.v);

  const RansacResult rr = with_phase("phase 1 (essential matrix)", [&] {
    return ransac_essential(corr, opts.ransac);
  });

  // With parameter-level noise the fixed threshold can under-count; the
  // estimate still needs five paths, so widen to all of them in that case.
  std::vector<bool> inliers = rr.inliers;
  if (std::count(inliers.begin(), inliers.end(), true) < 5) {
    inliers.assign(n, true);
  }

  std::vector<Correspondence> inlier_corr;
  std::vector<int> inlier_idx;
  for (int i = 0; i < n; ++i) {
    if (inliers[i]) {
      inlier_corr.push_back(corr[i]);
      inlier_idx.push_back(i);
    }
  }

  const auto [rot, n_r] = with_phase("phase 2 (pose decomposition)", [&] {
    return decompose_essential(rr.essential, inlier_corr);
  });

  std::vector<Vec3> points = with_phase("phase 3 (triangulation)", [&] {
    std::vector<Vec3> pts;
    pts.reserve(inlier_corr.size());
    for (const auto& cc : inlier_corr) pts.push_back(triangulate(rot, n_r, cc));
    return pts;
  });

  const int m = static_cast<int>(points.size());
  Eigen::VectorXd lengths(m), delays(m);
  std::vector<double> gains(m);
  for (int i = 0; i < m; ++i) {
    lengths(i) = points[i].norm() + (points[i] - n_r).norm();
    delays(i) = obs[inlier_idx[i]].tau;
    gains[i] = obs[inlier_idx[i]].gain_mag;
  }
  const DifferenceMatrix d = opts.sync == SyncMode::kSynchronized
                                 ? DifferenceMatrix::identity(m)
                                 : DifferenceMatrix::reference(gains);
  const double scale = with_phase("phase 4 (scale recovery)", [&] {
    return recover_scale(lengths, delays, d);
  });

  SlamEstimate est;
  est.pose = Pose(rot, scale * n_r);
  est.scatterers.reserve(m);
  for (const auto& p : points) est.scatterers.push_back(scale * p);
  est.scale = scale;
  est.inliers = std::move(inliers);
  if (opts.sync == SyncMode::kUnsynchronized) {
    double bias = 0.0;
    for (int i = 0; i < m; ++i) {
      bias += delays(i) - scale * lengths(i) / kSpeedOfLight;
    }
    est.clock_bias = bias / m;
  }
  return est;
}

SlamEstimate slam_with_los(const std::vector<PathObservation>& obs,
                           const SlamOptions& opts) {
  const int n = static_cast<int>(obs.size());
  int los = -1;
  for (int i = 0; i < n; ++i) {
    if (obs[i].is_los_hint.value_or(false)) {
      los = i;
      break;
    }
  }
  if (los < 0) {
    throw InsufficientDataError("LoS-known mode requires a LoS-flagged path");
  }
  if (n < 2) {
    throw InsufficientDataError(
        "LoS-known mode needs the LoS path plus at least one scatter path");
  }

  const auto [n_r, swing] = with_phase("phase 1 (epipole constraints)", [&] {
    return epipoles_from_los(obs[los].nu, obs[los].v);
  });
  const Vec3 nu0_bar = obs[los].nu.homogeneous();

  // One twist angle per scatter path, then a circular mean.
  const Rotation rot = with_phase("phase 2 (twist recovery)", [&] {
    double sin_acc = 0.0, cos_acc = 0.0;
    int used = 0;
    for (int i = 0; i < n; ++i) {
      if (i == los) continue;
      const auto pair = solve_twist_angle(swing, nu0_bar, obs[i].nu, obs[i].v);
      const Rotation r = disambiguate_twist(swing, pair, nu0_bar, obs[i].nu,
                                            obs[i].v);
      // Extract the chosen angle back from the selected rotation.
      const Rotation twist_only = swing.swing().transpose() * r;
      const double theta = log_so3(twist_only).dot(swing.n_par);
      sin_acc += std::sin(theta);
      cos_acc += std::cos(theta);
      ++used;
    }
    if (used == 0) {
      throw InsufficientDataError("no scatter path available for the twist");
    }
    const double theta_hat = std::atan2(sin_acc, cos_acc);
    return swing.rotation_at(theta_hat);
  });

  std::vector<Vec3> points;
  std::vector<int> scatter_idx;
  with_phase("phase 3 (triangulation)", [&] {
    for (int i = 0; i < n; ++i) {
      if (i == los) continue;
      points.push_back(triangulate(rot, n_r, Correspondence(obs[i].nu, obs[i].v)));
      scatter_idx.push_back(i);
    }
    return 0;
  });

  // The LoS entry of the scaled lengths is the unit baseline itself.
  const int m = static_cast<int>(points.size());
  Eigen::VectorXd lengths(m + 1), delays(m + 1);
  std::vector<double> gains(m + 1);
  lengths(0) = 1.0;
  delays(0) = obs[los].tau;
  gains[0] = obs[los].gain_mag;
  for (int i = 0; i < m; ++i) {
    lengths(i + 1) = points[i].norm() + (points[i] - n_r).norm();
    delays(i + 1) = obs[scatter_idx[i]].tau;
    gains[i + 1] = obs[scatter_idx[i]].gain_mag;
  }
  const DifferenceMatrix d = opts.sync == SyncMode::kSynchronized
                                 ? DifferenceMatrix::identity(m + 1)
                                 : DifferenceMatrix::reference(gains);
  const double scale = with_phase("phase 4 (scale recovery)", [&] {
    return recover_scale(lengths, delays, d);
  });

  SlamEstimate est;
  est.pose = Pose(rot, scale * n_r);
  est.scatterers.reserve(m);
  for (const auto& p : points) est.scatterers.push_back(scale * p);
  est.scale = scale;
  est.los_index = los;
  est.inliers.assign(n, true);
  if (opts.sync == SyncMode::kUnsynchronized) {
    double bias = 0.0;
    for (int i = 0; i <= m; ++i) {
      bias += delays(i) - scale * lengths(i) / kSpeedOfLight;
    }
    est.clock_bias = bias / (m + 1);
  }
  return est;
}

}  // namespace

SlamEstimate closed_form_slam(const std::vector<PathObservation>& obs,
                              const SlamOptions& opts) {
  if (opts.los == LosMode::kLosKnown) {
    return slam_with_los(obs, opts);
  }
  if (obs.size() < 5) {
    throw InsufficientDataError(
        "at least five paths are needed without LoS knowledge");
  }
  return slam_all_paths_as_scatterers(obs, opts);
}

}  // namespace wavepose
