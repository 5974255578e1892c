#ifndef WAVEPOSE_REFINE_HPP
#define WAVEPOSE_REFINE_HPP

#include <vector>

#include "wavepose/epipolar.hpp"

namespace wavepose {

/// Joint parameter set of the snapshot problem: receive-side pose plus one
/// 3D position per scatter path.
struct SlamParameters {
  Pose pose;
  std::vector<Vec3> scatterers;
};

/// Per-path weights for the three observation blocks: departure virtual
/// point, arrival virtual point, differenced delay.
struct WeightSpec {
  std::vector<double> w_nu;
  std::vector<double> w_v;
  std::vector<double> w_tau;

  static WeightSpec uniform(int paths);
  /// |alpha|^2 * [1, 1, 1, 1, toa_weight] per path.
  static WeightSpec from_gains(const std::vector<double>& gain_mags,
                               double toa_weight = 1e15);

  int paths() const { return static_cast<int>(w_nu.size()); }
  /// Stacked 5-per-path diagonal.
  Eigen::VectorXd diagonal() const;
  void validate() const;
};

/// Observation layout: 5 entries per path, [nu(2), v(2), differenced delay].
/// With los = true the first path is the LoS path and carries no scatterer
/// variables; scatterer k then corresponds to path k+1.
Eigen::VectorXd predict_observations(const SlamParameters& p,
                                     const DifferenceMatrix& d, bool los);

/// Stacks measured observations in the same layout as predict_observations.
Eigen::VectorXd stack_observations(const std::vector<PathObservation>& obs,
                                   const DifferenceMatrix& d);

/// Analytic Jacobian of predict_observations with respect to a left
/// perturbation of the pose transform (6 columns) followed by the scatterer
/// positions (3 columns each).
Eigen::MatrixXd jacobian(const SlamParameters& p, const DifferenceMatrix& d,
                         bool los);

struct StepSizes {
  double pose = 1.0;
  double scatter = 1.0;
};

/// One Gauss-Newton step with fixed step sizes. Throws
/// SingularNormalMatrixError when the weighted normal matrix is rank
/// deficient (under-determined geometry).
SlamParameters gn_step(const SlamParameters& p, const Eigen::VectorXd& y,
                       const WeightSpec& w, const DifferenceMatrix& d,
                       bool los, const StepSizes& kappa = {});

struct RefineOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double min_backtrack = 1e-4;
};

struct RefineReport {
  int iterations = 0;
  double objective = 0.0;
  double step_norm = 0.0;
  bool converged = false;  // step tolerance reached (vs. iteration cap)
};

struct RefineResult {
  SlamParameters params;
  RefineReport report;
};

/// Damped Gauss-Newton descent of the weighted least-squares objective.
/// Accepted iterations never increase the objective. Throws a
/// NonConvergenceError carrying the best iterate if no progress is possible
/// away from stationarity.
RefineResult refine(const SlamParameters& init, const Eigen::VectorXd& y,
                    const WeightSpec& w, const DifferenceMatrix& d, bool los,
                    const RefineOptions& opts = {});

/// Weighted objective value (y - mu)^T W (y - mu).
double slam_objective(const SlamParameters& p, const Eigen::VectorXd& y,
                      const WeightSpec& w, const DifferenceMatrix& d, bool los);

/// NonConvergenceError that carries the best iterate reached.
class RefineDivergedError : public NonConvergenceError {
 public:
  RefineDivergedError(std::string msg, SlamParameters best)
      : NonConvergenceError(std::move(msg)), best_iterate(std::move(best)) {}
  SlamParameters best_iterate;
};

}  // namespace wavepose

#endif  // WAVEPOSE_REFINE_HPP
