#ifndef WAVEPOSE_EPIPOLAR_HPP
#define WAVEPOSE_EPIPOLAR_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "wavepose/projection.hpp"

namespace wavepose {

/// Speed of light in vacuum [m/s].
constexpr double kSpeedOfLight = 299792458.0;

/// One propagation path as delivered by the channel-parameter stage:
/// departure/arrival virtual points, absolute delay, and gain magnitude.
struct PathObservation {
  VirtualPoint nu;       // departure (transmit-side) virtual point
  VirtualPoint v;        // arrival (receive-side) virtual point
  double tau = 0.0;      // delay [s], may include an unknown clock bias
  double gain_mag = 0.0; // |alpha|, linear
  std::optional<bool> is_los_hint;
};

enum class SyncMode { kSynchronized, kUnsynchronized };
enum class LosMode { kLosKnown, kLosUnknown, kNlosKnown };

/// Differencing matrix D = I - D' used to cancel the clock bias before scale
/// recovery. In synchronized mode D = I.
class DifferenceMatrix {
 public:
  static DifferenceMatrix identity(int n);
  /// Reference-path differencing: every row differences against the path
  /// with the largest gain magnitude; the reference row differences against
  /// the runner-up. Requires n >= 2.
  static DifferenceMatrix reference(const std::vector<double>& gain_mags);

  const Eigen::MatrixXd& matrix() const { return d_; }
  int size() const { return static_cast<int>(d_.rows()); }
  bool is_identity() const { return identity_; }

 private:
  DifferenceMatrix(Eigen::MatrixXd d, bool identity)
      : d_(std::move(d)), identity_(identity) {}
  Eigen::MatrixXd d_;
  bool identity_;
};

/// Essential-matrix candidates from exactly five correspondences. Solves the
/// null-space system plus the ten cubic constraints by the action-matrix
/// method; at most ten real solutions. Throws DegeneracyError when the 5x9
/// design matrix has rank < 5.
std::vector<EssentialMatrix> five_point(const std::vector<Correspondence>& c);

/// First-order (Sampson) squared distance of a correspondence to the
/// epipolar constraint set. Invariant to the scale of E.
double sampson_score(const EssentialMatrix& e, const Correspondence& c);

struct RansacResult {
  EssentialMatrix essential;
  std::vector<bool> inliers;
  double total_score = 0.0;  // truncated Sampson total of the winner
};

struct RansacOptions {
  int iterations = 200;
  double inlier_threshold = 1e-4;  // Sampson, virtual-plane units squared
  double early_exit_inlier_fraction = 0.95;
  std::uint64_t rng_seed = 0;
};

/// Robust essential-matrix estimation over >= 5 correspondences.
RansacResult ransac_essential(const std::vector<Correspondence>& c,
                              const RansacOptions& opts = {});

/// Relative pose (rotation + unit baseline direction) from an essential
/// matrix, disambiguated by the cheirality of the given correspondences.
/// Throws CheiralityError when no candidate puts a strict majority of the
/// points in front of both planes.
std::pair<Rotation, Vec3> decompose_essential(
    const EssentialMatrix& e, const std::vector<Correspondence>& inliers);

/// Homogeneous (DLT) two-view triangulation in the unit-baseline frame:
/// transmit side at the origin with identity orientation, receive side at
/// n_r with orientation rot. Throws ParallelRaysError for rays within 1e-12
/// of parallel.
Vec3 triangulate(const Rotation& rot, const Vec3& n_r,
                 const Correspondence& c);

/// Metric scale from scaled path lengths and measured delays:
/// s = (c/n) * sum_l [D tau]_l / [D d]_l.
double recover_scale(const Eigen::VectorXd& scaled_lengths,
                     const Eigen::VectorXd& delays, const DifferenceMatrix& d);

struct SlamEstimate {
  Pose pose;                    // receive-side pose in the transmit frame
  std::vector<Vec3> scatterers; // metric scatter positions, inlier paths only
  double scale = 0.0;           // recovered metric scale [m]
  std::optional<double> clock_bias;  // [s], unsynchronized mode only
  std::optional<int> los_index;      // input index of the LoS path
  std::vector<bool> inliers;         // per input path
};

struct SlamOptions {
  SyncMode sync = SyncMode::kUnsynchronized;
  LosMode los = LosMode::kLosUnknown;
  RansacOptions ransac;
};

/// Closed-form snapshot reconstruction: virtual points -> essential matrix ->
/// pose -> triangulation -> metric scale. In LoS-known mode the epipole
/// constraints recover the pose from as little as one scatter path.
SlamEstimate closed_form_slam(const std::vector<PathObservation>& obs,
                              const SlamOptions& opts = {});

}  // namespace wavepose

#endif  // WAVEPOSE_EPIPOLAR_HPP
