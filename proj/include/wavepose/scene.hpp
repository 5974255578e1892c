#ifndef WAVEPOSE_SCENE_HPP
#define WAVEPOSE_SCENE_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "wavepose/epipolar.hpp"

namespace wavepose {

/// Rectangular scattering surface with a directive-scattering exponent.
struct Facade {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec2 extents = Vec2::Ones();  // full side lengths along the in-plane axes
  int beta = 0;

  /// Deterministic in-plane axes: the second axis follows the steepest
  /// world-z direction within the plane (height), the first completes a
  /// right-handed triad with the normal.
  std::pair<Vec3, Vec3> axes() const;
  Vec3 point(double u, double w) const;
  bool contains(const Vec3& p, double tol = 1e-9) const;
};

/// Ground-truth simulation scene. Path order is LoS first (when present),
/// then scatterers; gains follow the same order.
struct ScatterScene {
  Pose bs_pose;
  Pose ue_pose;
  std::vector<Vec3> scatterers;
  std::vector<std::complex<double>> gains;
  double clock_bias = 0.0;  // [s]
  bool los_present = false;
};

/// Parameter-level observation noise: per-path 5-vector with covariance
/// sigma_mu^2 * diag(sigma_diag).
struct NoiseSpec {
  double sigma_mu = 0.0;
  Eigen::Matrix<double, 5, 1> sigma_diag =
      (Eigen::Matrix<double, 5, 1>() << 1.0, 1.0, 1.0, 1.0, 1e-15).finished();
};

/// Directive scattering pattern evaluated at a point on the facade plane.
/// Zero for geometry lit from behind; throws GeometryError when p is off the
/// plane by more than 1e-9 m.
double pattern_density(const Vec3& p, const Vec3& bs, const Vec3& ue,
                       const Facade& facade);

/// Hemisphere normalization of the (1 + cos psi)^beta lobe about the
/// specular direction at incidence theta_i.
double normalization_fbeta(int beta, double theta_i);

struct McmcOptions {
  int burn_in = 1000;
  int thinning = 10;
  std::uint64_t rng_seed = 0;
};

/// Random-walk Metropolis samples of the scattering density on the facade.
/// Throws MixingError when the adapted chain's acceptance rate leaves
/// (0.05, 0.95).
std::vector<Vec3> sample_scatterers(const Facade& facade, const Vec3& bs,
                                    const Vec3& ue, int count,
                                    const McmcOptions& opts = {});

/// Exponential-decay cluster gain model constants.
struct GainModelParams {
  double cluster_decay_s = 25.9e-9;
  double sigma_cluster_db = 1.0;
  double intra_decay_s = 16.9e-9;
  double sigma_intra_db = 6.0;
};

struct ClusterGains {
  double power = 0.0;  // P_k
  std::vector<std::complex<double>> gains;
};

/// Draws per-scatter complex gains such that each cluster's gain powers sum
/// to its cluster power exactly.
std::vector<ClusterGains> assign_gains(
    const std::vector<double>& cluster_excess_delays,
    const std::vector<std::vector<double>>& intra_excess_delays,
    const GainModelParams& params, std::uint64_t rng_seed);

/// Scene with transmit/receive at the foci of an ellipsoid, facing each
/// other, and scatterers uniform on the surface inside the receiver's field
/// of view (full cone angle fov).
ScatterScene ellipsoid_scene(const Vec3& semi_axes, int n_scatter, double fov,
                             std::uint64_t rng_seed);

struct TwoFacadeOptions {
  int beta = 10;
  int scatterers_per_facade = 100;
  bool los = true;
  double clock_bias = 0.0;
  std::uint64_t rng_seed = 0;
};

/// The desk-scale two-surface scene: a building facade and the ground plane,
/// transmit/receive arrays facing each other, scatterers drawn from the
/// directive-scattering model with cluster gains.
ScatterScene two_facade_scene(const TwoFacadeOptions& opts);

struct ObserveResult {
  std::vector<PathObservation> observations;
  std::vector<int> dropped;  // scene path indices outside both frusta
};

/// Noisy channel-parameter observations of a scene. Paths behind either
/// virtual plane are dropped and reported.
ObserveResult observe(const ScatterScene& scene, const NoiseSpec& noise,
                      std::uint64_t rng_seed);

}  // namespace wavepose

#endif  // WAVEPOSE_SCENE_HPP
