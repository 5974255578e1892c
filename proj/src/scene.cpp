#include "wavepose/scene.hpp"

#include <array>
#include <cmath>
#include <random>

#include "wavepose/rng.hpp"

namespace wavepose {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= double(n - k + i) / double(i);
  return r;
}

Rotation look_rotation(const Vec3& boresight, const Vec3& up_hint) {
  const Vec3 z = boresight.normalized();
  Vec3 x = up_hint - up_hint.dot(z) * z;
  if (x.norm() < 1e-9) {
    x = Vec3::UnitX() - Vec3::UnitX().dot(z) * z;
  }
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 m;
  m.col(0) = x;
  m.col(1) = y;
  m.col(2) = z;
  return Rotation::from_matrix(m);
}

}  // namespace

std::pair<Vec3, Vec3> Facade::axes() const {
  const Vec3 n = normal.normalized();
  Vec3 w = Vec3::UnitZ() - Vec3::UnitZ().dot(n) * n;
  if (w.norm() < 1e-6) {
    w = Vec3::UnitY() - Vec3::UnitY().dot(n) * n;
  }
  w.normalize();
  const Vec3 u = w.cross(n);
  return {u, w};
}

Vec3 Facade::point(double u, double w) const {
  const auto [ua, wa] = axes();
  return center + u * ua + w * wa;
}

bool Facade::contains(const Vec3& p, double tol) const {
  const auto [ua, wa] = axes();
  const Vec3 d = p - center;
  if (std::abs(d.dot(normal.normalized())) > tol) return false;
  return std::abs(d.dot(ua)) <= extents(0) / 2.0 + tol &&
         std::abs(d.dot(wa)) <= extents(1) / 2.0 + tol;
}

double normalization_fbeta(int beta, double theta_i) {
  if (beta < 0) throw ConfigError("beta must be nonnegative");
  const double ct = std::cos(theta_i);
  const double s2 = std::sin(theta_i) * std::sin(theta_i);
  double f = 0.0;
  for (int j = 0; j <= beta; ++j) {
    double ij;
    if (j % 2 == 0) {
      ij = 2.0 * M_PI / (j + 1);
    } else {
      double series = 0.0;
      for (int w = 0; w <= (j - 1) / 2; ++w) {
        series += binomial(2 * w, w) * std::pow(s2 / 4.0, w);
      }
      ij = 2.0 * M_PI / (j + 1) * ct * series;
    }
    f += binomial(beta, j) * ij;
  }
  return f / std::pow(2.0, beta);
}

double pattern_density(const Vec3& p, const Vec3& bs, const Vec3& ue,
                       const Facade& facade) {
  const Vec3 n = facade.normal.normalized();
  if (std::abs((p - facade.center).dot(n)) > 1e-9) {
    throw GeometryError("point is off the facade plane");
  }
  const double d_i = (bs - p).norm();
  const double d_s = (ue - p).norm();
  if (d_i < 1e-12 || d_s < 1e-12) {
    throw GeometryError("endpoint coincides with the scatter point");
  }

  const double cos_i = n.dot(bs - p) / d_i;
  const double cos_s = n.dot(ue - p) / d_s;
  if (cos_i <= 0.0 || cos_s <= 0.0) return 0.0;

  if (facade.beta == 0) {
    return cos_i * cos_s / (d_i * d_i * d_s * d_s);
  }
  const Vec3 w_in = (p - bs) / d_i;
  const Vec3 w_ref = w_in - 2.0 * n.dot(w_in) * n;
  const Vec3 w_sc = (ue - p) / d_s;
  const double cos_psi = std::clamp(w_ref.dot(w_sc), -1.0, 1.0);
  const double f = normalization_fbeta(facade.beta, std::acos(cos_i));
  return cos_i * std::pow(1.0 + cos_psi, facade.beta) /
         (f * d_i * d_i * d_s * d_s);
}

std::vector<Vec3> sample_scatterers(const Facade& facade, const Vec3& bs,
                                    const Vec3& ue, int count,
                                    const McmcOptions& opts) {
  if (count < 1) throw ConfigError("scatter count must be positive");
  auto rng = make_rng(opts.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double hu = facade.extents(0) / 2.0;
  const double hw = facade.extents(1) / 2.0;

  auto density = [&](double u, double w) -> double {
    if (std::abs(u) > hu || std::abs(w) > hw) return 0.0;
    return pattern_density(facade.point(u, w), bs, ue, facade);
  };

  // Start at the best point of a coarse scan; the density may vanish over
  // most of the surface for large beta.
  double cur_u = 0.0, cur_w = 0.0, cur_p = 0.0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double u = -hu + 2.0 * hu * i / 20.0;
      const double w = -hw + 2.0 * hw * j / 20.0;
      const double p = density(u, w);
      if (p > cur_p) {
        cur_p = p;
        cur_u = u;
        cur_w = w;
      }
    }
  }
  if (cur_p <= 0.0) {
    throw MixingError("scattering density vanishes on the whole facade");
  }

  double sigma_u = 0.15 * facade.extents(0);
  double sigma_w = 0.15 * facade.extents(1);
  int window_accepts = 0, window_steps = 0;

  auto step = [&](bool adapt) {
    const double prop_u = cur_u + sigma_u * gauss(rng);
    const double prop_w = cur_w + sigma_w * gauss(rng);
    const double prop_p = density(prop_u, prop_w);
    ++window_steps;
    if (prop_p > 0.0 && (prop_p >= cur_p || unif(rng) < prop_p / cur_p)) {
      cur_u = prop_u;
      cur_w = prop_w;
      cur_p = prop_p;
      ++window_accepts;
    }
    if (adapt && window_steps == 100) {
      const double rate = window_accepts / 100.0;
      const double factor = std::exp(rate - 0.3);
      sigma_u = std::clamp(sigma_u * factor, 1e-4 * hu, 2.0 * hu);
      sigma_w = std::clamp(sigma_w * factor, 1e-4 * hw, 2.0 * hw);
      window_steps = 0;
      window_accepts = 0;
    }
  };

  for (int i = 0; i < opts.burn_in; ++i) step(true);

  window_steps = 0;
  window_accepts = 0;
  std::vector<Vec3> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    for (int i = 0; i < opts.thinning; ++i) step(false);
    out.push_back(facade.point(cur_u, cur_w));
  }

  const double rate = double(window_accepts) / double(window_steps);
  if (rate <= 0.05 || rate >= 0.95) {
    throw MixingError("chain acceptance rate " + std::to_string(rate) +
                      " outside (0.05, 0.95)");
  }
  return out;
}

std::vector<ClusterGains> assign_gains(
    const std::vector<double>& cluster_excess_delays,
    const std::vector<std::vector<double>>& intra_excess_delays,
    const GainModelParams& params, std::uint64_t rng_seed) {
  if (cluster_excess_delays.size() != intra_excess_delays.size()) {
    throw ConfigError("cluster and intra delay lists disagree");
  }
  if (params.cluster_decay_s <= 0.0 || params.intra_decay_s <= 0.0) {
    throw ConfigError("decay constants must be positive");
  }
  auto rng = make_rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);

  std::vector<ClusterGains> out;
  for (size_t k = 0; k < cluster_excess_delays.size(); ++k) {
    const double z = params.sigma_cluster_db * gauss(rng);
    ClusterGains cg;
    cg.power = std::exp(-cluster_excess_delays[k] / params.cluster_decay_s) *
               std::pow(10.0, z / 10.0);

    const auto& intra = intra_excess_delays[k];
    std::vector<double> shares(intra.size());
    double total = 0.0;
    for (size_t n = 0; n < intra.size(); ++n) {
      const double u = params.sigma_intra_db * gauss(rng);
      shares[n] = std::exp(-intra[n] / params.intra_decay_s) *
                  std::pow(10.0, u / 10.0);
      total += shares[n];
    }
    if (!(total > 0.0)) {
      throw ConfigError("intra-cluster power shares vanished");
    }
    for (size_t n = 0; n < intra.size(); ++n) {
      const double p = shares[n] / total * cg.power;
      cg.gains.push_back(std::polar(std::sqrt(p), phase(rng)));
    }
    out.push_back(std::move(cg));
  }
  return out;
}

ScatterScene ellipsoid_scene(const Vec3& semi_axes, int n_scatter, double fov,
                             std::uint64_t rng_seed) {
  const double a = semi_axes(0), b = semi_axes(1), c = semi_axes(2);
  if (!(a >= b && b >= c && c > 0.0)) {
    throw ConfigError("semi-axes must be positive and ordered descending");
  }
  if (a - b < 1e-9) {
    throw ConfigError("degenerate foci: two leading semi-axes are equal");
  }
  if (n_scatter < 1) throw ConfigError("need at least one scatterer");
  if (fov <= 0.0) throw ConfigError("field of view admits no scatterers");

  const double focal = std::sqrt(a * a - b * b);
  ScatterScene scene;
  scene.bs_pose = Pose(look_rotation(Vec3::UnitX(), Vec3::UnitY()),
                       Vec3(-focal, 0.0, 0.0));
  scene.ue_pose = Pose(look_rotation(-Vec3::UnitX(), Vec3::UnitY()),
                       Vec3(focal, 0.0, 0.0));
  scene.los_present = false;

  auto rng = make_rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const Vec3 ue_boresight = scene.ue_pose.rot.matrix().col(2);
  const double cos_half_fov = std::cos(fov / 2.0);

  long attempts = 0;
  const long max_attempts = 2000000L + 200000L * long(n_scatter);
  while (static_cast<int>(scene.scatterers.size()) < n_scatter) {
    if (++attempts > max_attempts) {
      throw ConfigError("field of view admits no scatterers");
    }
    Vec3 u(gauss(rng), gauss(rng), gauss(rng));
    const double norm = u.norm();
    if (norm < 1e-9) continue;
    u /= norm;
    // Area-correct rejection for uniformity on the ellipsoid surface.
    const double w =
        std::sqrt((u.x() / a) * (u.x() / a) + (u.y() / b) * (u.y() / b) +
                  (u.z() / c) * (u.z() / c)) *
        c;
    if (unif(rng) > w) continue;
    const Vec3 p(a * u.x(), b * u.y(), c * u.z());

    const Vec3 to_p = p - scene.ue_pose.trans;
    if (to_p.dot(ue_boresight) < cos_half_fov * to_p.norm()) continue;
    // Must be projectable on the transmit side as well.
    const Vec3 in_bs = scene.bs_pose.world_to_frame(p);
    if (in_bs.z() <= 1e-6) continue;
    scene.scatterers.push_back(p);
    scene.gains.push_back(1.0);
  }
  return scene;
}

ScatterScene two_facade_scene(const TwoFacadeOptions& opts) {
  ScatterScene scene;
  Mat3 r_bs, r_ue;
  r_bs << 0, 0, -1, 1, 0, 0, 0, -1, 0;
  r_ue << 0, 0, 1, -1, 0, 0, 0, -1, 0;
  scene.bs_pose = Pose(Rotation::from_matrix(r_bs), Vec3(20.0, 0.0, 8.0));
  scene.ue_pose = Pose(Rotation::from_matrix(r_ue), Vec3(0.0, 0.0, 2.0));
  scene.los_present = opts.los;
  scene.clock_bias = opts.clock_bias;

  // Building facade in the plane y = 10; the lit side faces the arrays.
  Facade building;
  building.center = Vec3(10.0, 10.0, 5.0);
  building.normal = Vec3(0.0, -1.0, 0.0);
  building.extents = Vec2(20.0, 10.0);
  building.beta = opts.beta;

  Facade ground;
  ground.center = Vec3(10.0, 0.0, 0.0);
  ground.normal = Vec3(0.0, 0.0, 1.0);
  ground.extents = Vec2(20.0, 20.0);
  ground.beta = opts.beta;

  const Vec3 bs = scene.bs_pose.trans;
  const Vec3 ue = scene.ue_pose.trans;
  const double d_los = (bs - ue).norm();

  std::vector<double> cluster_delays;
  std::vector<std::vector<double>> intra_delays;
  std::vector<Vec3> all_points;

  const std::array<Facade, 2> facades = {building, ground};
  for (size_t k = 0; k < facades.size(); ++k) {
    const auto& f = facades[k];
    const auto points =
        sample_scatterers(f, bs, ue, opts.scatterers_per_facade,
                          {1000, 10, derive_seed(opts.rng_seed, k)});

    // Specular path length via the mirrored receiver.
    const Vec3 n = f.normal.normalized();
    const Vec3 mirrored = ue - 2.0 * (ue - f.center).dot(n) * n;
    const double d_specular = (bs - mirrored).norm();
    cluster_delays.push_back((d_specular - d_los) / kSpeedOfLight);

    std::vector<double> intra;
    for (const auto& p : points) {
      const double len = (p - bs).norm() + (p - ue).norm();
      intra.push_back((len - d_specular) / kSpeedOfLight);
      all_points.push_back(p);
    }
    intra_delays.push_back(std::move(intra));
  }

  const auto gains = assign_gains(cluster_delays, intra_delays, {},
                                  derive_seed(opts.rng_seed, 7));

  if (scene.los_present) {
    scene.gains.push_back(1.0);  // direct path dominates the reflections
  }
  for (const auto& cg : gains) {
    for (const auto& g : cg.gains) scene.gains.push_back(g);
  }
  scene.scatterers = std::move(all_points);
  return scene;
}

ObserveResult observe(const ScatterScene& scene, const NoiseSpec& noise,
                      std::uint64_t rng_seed) {
  auto rng = make_rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Eigen::Matrix<double, 5, 1> stddev =
      noise.sigma_mu * noise.sigma_diag.cwiseSqrt();

  ObserveResult result;
  const int total = static_cast<int>(scene.scatterers.size()) +
                    (scene.los_present ? 1 : 0);
  for (int idx = 0; idx < total; ++idx) {
    const bool is_los = scene.los_present && idx == 0;
    const int k = idx - (scene.los_present ? 1 : 0);
    const Vec3 target = is_los ? scene.ue_pose.trans : scene.scatterers[k];
    const Vec3 rx_target = is_los ? scene.bs_pose.trans : scene.scatterers[k];

    PathObservation obs;
    try {
      obs.nu = project(scene.bs_pose, target);
      obs.v = project(scene.ue_pose, rx_target);
    } catch (const Error&) {
      result.dropped.push_back(idx);
      continue;
    }

    const double len =
        is_los ? (scene.ue_pose.trans - scene.bs_pose.trans).norm()
               : (scene.scatterers[k] - scene.bs_pose.trans).norm() +
                     (scene.scatterers[k] - scene.ue_pose.trans).norm();
    obs.tau = scene.clock_bias + len / kSpeedOfLight;
    obs.gain_mag = std::abs(scene.gains[idx]);
    obs.is_los_hint = is_los;

    obs.nu.v.x() += stddev(0) * gauss(rng);
    obs.nu.v.y() += stddev(1) * gauss(rng);
    obs.v.v.x() += stddev(2) * gauss(rng);
    obs.v.v.y() += stddev(3) * gauss(rng);
    obs.tau += stddev(4) * gauss(rng);

    result.observations.push_back(std::move(obs));
  }
  return result;
}

}  // namespace wavepose
