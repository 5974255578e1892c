#ifndef WAVEPOSE_ARRAY_HPP
#define WAVEPOSE_ARRAY_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "wavepose/projection.hpp"

namespace wavepose {

using ComplexD = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Uniform rectangular array with half-wavelength element spacing.
struct UraConfig {
  int nx = 1;
  int ny = 1;

  int elements() const { return nx * ny; }
};

/// Narrowband snapshot block: one column per time sample.
struct SnapshotBlock {
  CMat y;                      // (nx*ny) x T
  double sample_rate = 0.0;    // Hz
};

struct ToneSource {
  AzEl direction;
  ComplexD gain = 1.0;
  double tone_hz = 0.0;
};

/// Array response for a wavefront from the given direction; element (0, 0)
/// has unit phase; entries are unit modulus.
CVec steering_vector(const UraConfig& cfg, const AzEl& a);

struct SnapshotOptions {
  int snapshots = 256;
  double sample_rate_hz = 1000.0;
  double snr_db = 0.0;
  std::uint64_t rng_seed = 0;
};

/// y(t) = sum_i gain_i a(psi_i) exp(j 2 pi f_i t) + noise, with complex
/// Gaussian noise of variance 10^(-snr/10) per element. Throws ConfigError
/// on duplicate tone frequencies.
SnapshotBlock synthesize_snapshots(const UraConfig& cfg,
                                   const std::vector<ToneSource>& sources,
                                   const SnapshotOptions& opts);

struct MusicOptions {
  double grid_step_rad = M_PI / 180.0;
  double max_theta_rad = M_PI / 2.0 - 1e-3;
  int refine_rounds = 3;
};

/// 2D MUSIC estimates for the given source count: coarse grid search of the
/// noise-subspace projection followed by local quadratic refinement. Throws
/// RankError when the sample covariance cannot support num_sources.
std::vector<AzEl> music_aoa(const SnapshotBlock& block, const UraConfig& cfg,
                            int num_sources, const MusicOptions& opts = {});

/// Associates each arrival direction with the tone its MVDR beam output is
/// strongest at. Returns p with p[aoa_index] = tone_index (a permutation).
/// Throws AssociationError on a confident collision.
std::vector<int> mvdr_associate(const SnapshotBlock& block,
                                const UraConfig& cfg,
                                const std::vector<AzEl>& aoas,
                                const std::vector<double>& tones_hz);

}  // namespace wavepose

#endif  // WAVEPOSE_ARRAY_HPP
