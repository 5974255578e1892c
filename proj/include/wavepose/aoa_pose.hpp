#ifndef WAVEPOSE_AOA_POSE_HPP
#define WAVEPOSE_AOA_POSE_HPP

#include <vector>

#include "wavepose/projection.hpp"

namespace wavepose {

/// A known transmit position paired with the virtual point of its arrival
/// direction at the receiver.
struct BsCorrespondence {
  Vec3 bs_pos = Vec3::Zero();
  VirtualPoint v;
};

/// Minimal-case pose from three correspondences. Returns all real solutions
/// (at most four), each reprojecting the three inputs exactly. Throws
/// DegeneracyError for collinear transmit positions.
std::vector<Pose> p3p_solve(const std::vector<BsCorrespondence>& c);

struct ReprojectionOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-14;
};

struct ReprojectionResult {
  Pose pose;
  double objective = 0.0;      // sum of squared reprojection residuals
  double gradient_norm = 0.0;
  int iterations = 0;
  bool hit_iteration_cap = false;
};

/// Damped Gauss-Newton on the reprojection objective over the pose manifold.
/// Objective is non-increasing across iterations; throws NonConvergenceError
/// if it cannot make progress while the gradient is still large.
ReprojectionResult pose_refine_reprojection(
    const Pose& init, const std::vector<BsCorrespondence>& c,
    const std::vector<double>& weights = {},
    const ReprojectionOptions& opts = {});

/// Unique pose from >= 4 correspondences: minimal solve on a maximal-spread
/// triple, disambiguation by total reprojection error, then refinement.
/// With exactly three inputs the solution is returned only when unambiguous.
Pose pnp_solve(const std::vector<BsCorrespondence>& c);

}  // namespace wavepose

#endif  // WAVEPOSE_AOA_POSE_HPP
