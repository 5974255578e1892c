#include "wavepose/los_prior.hpp"

#include <cmath>

namespace wavepose {

std::pair<Vec3, SwingTwist> epipoles_from_los(const Vec3& nu0_bar,
                                              const Vec3& v0_bar) {
  const double norm_nu = nu0_bar.norm();
  const double norm_v = v0_bar.norm();
  if (norm_nu < 1e-14 || norm_v < 1e-14) {
    throw DegeneracyError("zero epipole vector");
  }

  const Vec3 cross = nu0_bar.cross(v0_bar);
  if (cross.norm() < 1e-12 * norm_nu * norm_v) {
    throw DegeneracyError("epipole vectors are parallel: swing axis undefined");
  }

  SwingTwist st;
  st.n_par = v0_bar / norm_v;

  // The swing rotates v0_bar onto the direction of -nu0_bar.
  const double cos_angle =
      std::clamp(-v0_bar.dot(nu0_bar) / (norm_v * norm_nu), -1.0, 1.0);
  st.u_perp = cross.normalized() * std::acos(cos_angle);

  return {nu0_bar / norm_nu, st};
}

std::pair<Vec3, SwingTwist> epipoles_from_los(const VirtualPoint& nu0,
                                              const VirtualPoint& v0) {
  return epipoles_from_los(nu0.homogeneous(), v0.homogeneous());
}

std::pair<double, double> intersect_unit_circle(const Vec3& line) {
  const double a = line(0);
  const double b = line(1);
  const double c = line(2);
  const double r = std::hypot(a, b);
  if (r < 1e-14) {
    throw DegeneracyError("line normal has no cos/sin components");
  }
  // a cos(t) + b sin(t) = r cos(t - delta), delta = atan2(b, a).
  const double delta = std::atan2(b, a);
  const double ratio = -c / r;
  if (std::abs(ratio) > 1.0 + 1e-9) {
    throw NoIntersectionError("line misses the unit circle");
  }
  const double gamma = std::acos(std::clamp(ratio, -1.0, 1.0));
  auto wrap = [](double t) {
    t = std::remainder(t, 2.0 * M_PI);
    if (t <= -M_PI) t += 2.0 * M_PI;
    return t;
  };
  return {wrap(delta + gamma), wrap(delta - gamma)};
}

namespace {

// frak_v^T = nu_l_bar^T (nu0_bar)_x R_perp, the row vector the twist
// constraint contracts against.
Vec3 twist_row(const SwingTwist& st, const Vec3& nu0_bar, const Vec3& nu_l) {
  return st.swing().matrix().transpose() * skew(nu0_bar).transpose() * nu_l;
}

}  // namespace

std::pair<double, double> solve_twist_angle(const SwingTwist& st,
                                            const Vec3& nu0_bar,
                                            const VirtualPoint& nu_l,
                                            const VirtualPoint& v_l) {
  const Vec3 fv = twist_row(st, nu0_bar, nu_l.homogeneous());
  const Vec3 vbar = v_l.homogeneous();
  const Vec3 line(fv.dot(vbar), fv.dot(st.n_par.cross(vbar)), 0.0);
  return intersect_unit_circle(line);
}

Rotation disambiguate_twist(const SwingTwist& st,
                            const std::pair<double, double>& theta_pair,
                            const Vec3& nu0_bar, const VirtualPoint& nu_l,
                            const VirtualPoint& v_l) {
  const Vec3 ref = nu0_bar.cross(nu_l.homogeneous());
  const Vec3 vbar = v_l.homogeneous();

  auto side = [&](double theta) {
    const Rotation r = st.rotation_at(theta);
    const Vec3 test = nu0_bar.cross(r * vbar);
    const double denom = ref.norm() * test.norm();
    if (denom < 1e-30) return 0.0;
    return ref.dot(test) / denom;
  };

  const double s1 = side(theta_pair.first);
  const double s2 = side(theta_pair.second);
  constexpr double kMargin = 1e-9;

  const bool ok1 = s1 > kMargin;
  const bool ok2 = s2 > kMargin;
  if (ok1 && ok2) {
    // Tangency produces the same angle twice; anything else is ambiguous.
    if (std::abs(std::remainder(theta_pair.first - theta_pair.second,
                                2.0 * M_PI)) < 1e-9) {
      return st.rotation_at(theta_pair.first);
    }
    throw AmbiguityError("both twist candidates pass the sign test");
  }
  if (!ok1 && !ok2) {
    throw AmbiguityError("no twist candidate passes the sign test");
  }
  return st.rotation_at(ok1 ? theta_pair.first : theta_pair.second);
}

std::vector<Correspondence> augment_correspondences(const VirtualPoint& nu0,
                                                    const VirtualPoint& v0) {
  const Vec3 nb = nu0.homogeneous();
  const Vec3 vb = v0.homogeneous();
  return {
      Correspondence(Vec3::UnitX(), vb), Correspondence(Vec3::UnitY(), vb),
      Correspondence(Vec3::UnitZ(), vb), Correspondence(nb, Vec3::UnitX()),
      Correspondence(nb, Vec3::UnitY()), Correspondence(nb, Vec3::UnitZ()),
  };
}

}  // namespace wavepose
