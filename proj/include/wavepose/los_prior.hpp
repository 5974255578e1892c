#ifndef WAVEPOSE_LOS_PRIOR_HPP
#define WAVEPOSE_LOS_PRIOR_HPP

#include <utility>
#include <vector>

#include "wavepose/projection.hpp"

namespace wavepose {

/// Swing-twist factorization R = exp(u_perp^) * exp(theta * n_par^) with
/// u_perp orthogonal to the twist axis n_par.
struct SwingTwist {
  Vec3 u_perp = Vec3::Zero();   // swing rotation vector
  Vec3 n_par = Vec3::UnitZ();   // unit twist axis
  double theta = 0.0;           // twist angle, set once solved

  Rotation swing() const { return exp_so3(u_perp); }
  Rotation rotation_at(double twist_angle) const {
    return swing() * exp_so3(twist_angle * n_par);
  }
  Rotation rotation() const { return rotation_at(theta); }
};

/// Baseline direction and swing part of the receive-side orientation from
/// the two LoS epipoles. The twist angle is left unset. Throws
/// DegeneracyError for (anti-)parallel epipole vectors (head-on geometry).
std::pair<Vec3, SwingTwist> epipoles_from_los(const Vec3& nu0_bar,
                                              const Vec3& v0_bar);
std::pair<Vec3, SwingTwist> epipoles_from_los(const VirtualPoint& nu0,
                                              const VirtualPoint& v0);

/// Intersections of the unit circle with the line n(0)*cos + n(1)*sin + n(2)
/// = 0. Tangency returns the double root twice. Throws NoIntersectionError
/// when the line misses the circle beyond tolerance and DegeneracyError when
/// the first two entries vanish.
std::pair<double, double> intersect_unit_circle(const Vec3& line);

/// Twist-angle candidates consistent with one scatter-path correspondence.
std::pair<double, double> solve_twist_angle(const SwingTwist& st,
                                            const Vec3& nu0_bar,
                                            const VirtualPoint& nu_l,
                                            const VirtualPoint& v_l);

/// Selects the twist angle whose rotated arrival ray lies on the observed
/// side of the epipolar plane, and returns the full rotation. Throws
/// AmbiguityError when the sign test cannot separate the two candidates.
Rotation disambiguate_twist(const SwingTwist& st,
                            const std::pair<double, double>& theta_pair,
                            const Vec3& nu0_bar, const VirtualPoint& nu_l,
                            const VirtualPoint& v_l);

/// The six synthetic correspondences that encode the epipole constraints,
/// suitable for feeding into the essential-matrix solvers together with the
/// scatter-path correspondences.
std::vector<Correspondence> augment_correspondences(const VirtualPoint& nu0,
                                                    const VirtualPoint& v0);

}  // namespace wavepose

#endif  // WAVEPOSE_LOS_PRIOR_HPP
