#include "wavepose/array.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "wavepose/assignment.hpp"
#include "wavepose/rng.hpp"

namespace wavepose {

CVec steering_vector(const UraConfig& cfg, const AzEl& a) {
  if (cfg.nx < 1 || cfg.ny < 1) {
    throw ConfigError("array needs at least one element per axis");
  }
  const double st = std::sin(a.theta);
  const double px = M_PI * st * std::cos(a.phi);  // x-axis phase step
  const double py = M_PI * st * std::sin(a.phi);  // y-axis phase step

  CVec ax(cfg.nx), ay(cfg.ny);
  for (int m = 0; m < cfg.nx; ++m) ax(m) = std::polar(1.0, m * px);
  for (int m = 0; m < cfg.ny; ++m) ay(m) = std::polar(1.0, m * py);

  CVec out(cfg.elements());
  for (int my = 0; my < cfg.ny; ++my) {
    out.segment(my * cfg.nx, cfg.nx) = ay(my) * ax;
  }
  return out;
}

SnapshotBlock synthesize_snapshots(const UraConfig& cfg,
                                   const std::vector<ToneSource>& sources,
                                   const SnapshotOptions& opts) {
  if (opts.snapshots < 1) throw ConfigError("need at least one snapshot");
  for (size_t i = 0; i < sources.size(); ++i) {
    for (size_t j = i + 1; j < sources.size(); ++j) {
      if (std::abs(sources[i].tone_hz - sources[j].tone_hz) < 1e-9) {
        throw ConfigError("duplicate tone frequency " +
                          std::to_string(sources[i].tone_hz));
      }
    }
  }

  const int n = cfg.elements();
  const int t_count = opts.snapshots;
  const double sigma2 = std::pow(10.0, -opts.snr_db / 10.0);
  const double sigma_part = std::sqrt(sigma2 / 2.0);

  auto rng = make_rng(opts.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SnapshotBlock block;
  block.sample_rate = opts.sample_rate_hz;
  block.y = CMat::Zero(n, t_count);

  for (const auto& src : sources) {
    const CVec a = steering_vector(cfg, src.direction);
    const double w = 2.0 * M_PI * src.tone_hz / opts.sample_rate_hz;
    for (int t = 0; t < t_count; ++t) {
      block.y.col(t) += src.gain * std::polar(1.0, w * t) * a;
    }
  }
  for (int t = 0; t < t_count; ++t) {
    for (int e = 0; e < n; ++e) {
      block.y(e, t) += ComplexD(sigma_part * gauss(rng), sigma_part * gauss(rng));
    }
  }
  return block;
}

namespace {

struct Spectrum {
  // Noise-subspace projection energy g = |a|^2 - |Es^H a|^2; MUSIC peaks are
  // minima of g.
  const UraConfig& cfg;
  const CMat& signal_subspace;

  double operator()(double phi, double theta) const {
    const CVec a = steering_vector(cfg, AzEl(phi, theta));
    return a.squaredNorm() - (signal_subspace.adjoint() * a).squaredNorm();
  }
};

double wrap_angle(double phi) {
  phi = std::remainder(phi, 2.0 * M_PI);
  if (phi <= -M_PI) phi += 2.0 * M_PI;
  return phi;
}

// One round of three-point parabola descent along a single axis.
double parabola_step(double x, double h, double gm, double g0, double gp) {
  const double denom = gp - 2.0 * g0 + gm;
  if (std::abs(denom) < 1e-300) return x;
  double shift = -0.5 * h * (gp - gm) / denom;
  shift = std::clamp(shift, -h, h);
  return x + shift;
}

}  // namespace

std::vector<AzEl> music_aoa(const SnapshotBlock& block, const UraConfig& cfg,
                            int num_sources, const MusicOptions& opts) {
  const int n = cfg.elements();
  const int t_count = static_cast<int>(block.y.cols());
  if (num_sources < 1) throw ConfigError("num_sources must be positive");
  if (block.y.rows() != n) throw ConfigError("block does not match array size");
  if (t_count < num_sources) {
    throw RankError("snapshot count below source count");
  }

  const CMat cov = block.y * block.y.adjoint() / double(t_count);
  Eigen::SelfAdjointEigenSolver<CMat> eig(cov);
  const Eigen::VectorXd evals = eig.eigenvalues();  // ascending
  const double lmax = evals(n - 1);
  int rank = 0;
  for (int i = 0; i < n; ++i) {
    if (evals(i) > 1e-12 * lmax) ++rank;
  }
  if (rank < num_sources) {
    throw RankError("sample covariance rank below source count");
  }
  const CMat es = eig.eigenvectors().rightCols(num_sources);
  const Spectrum g{cfg, es};

  const double step = opts.grid_step_rad;
  const int n_theta = static_cast<int>(opts.max_theta_rad / step) + 1;
  const int n_phi = std::max(1, static_cast<int>(std::round(2.0 * M_PI / step)));

  Eigen::MatrixXd grid(n_theta, n_phi);
  for (int it = 0; it < n_theta; ++it) {
    const double theta = it * step;
    for (int ip = 0; ip < n_phi; ++ip) {
      grid(it, ip) = g(wrap_angle(-M_PI + ip * step), theta);
    }
  }

  // Greedy deepest-minima selection with an exclusion radius, measured
  // between wavefront normals so the theta = 0 azimuth ambiguity is benign.
  struct Cell {
    int it, ip;
    double val;
  };
  std::vector<Cell> cells;
  cells.reserve(n_theta * n_phi);
  for (int it = 0; it < n_theta; ++it) {
    for (int ip = 0; ip < n_phi; ++ip) cells.push_back({it, ip, grid(it, ip)});
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.val < b.val; });

  const double exclusion = 2.5 * step;
  std::vector<Vec3> chosen_normals;
  std::vector<std::pair<double, double>> seeds;  // (phi, theta)
  for (const auto& cell : cells) {
    if (static_cast<int>(seeds.size()) >= num_sources) break;
    const double phi = wrap_angle(-M_PI + cell.ip * step);
    const double theta = cell.it * step;
    const Vec3 normal = azel_to_normal(AzEl(phi, theta));
    bool blocked = false;
    for (const auto& prev : chosen_normals) {
      if (std::acos(std::clamp(prev.dot(normal), -1.0, 1.0)) < exclusion) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;
    chosen_normals.push_back(normal);
    seeds.emplace_back(phi, theta);
  }
  if (static_cast<int>(seeds.size()) < num_sources) {
    throw RankError("spectrum does not expose enough distinct peaks");
  }

  std::vector<AzEl> out;
  for (auto [phi, theta] : seeds) {
    double h = step;
    for (int round = 0; round < opts.refine_rounds; ++round) {
      // phi axis
      {
        const double gm = g(wrap_angle(phi - h), theta);
        const double g0 = g(phi, theta);
        const double gp = g(wrap_angle(phi + h), theta);
        phi = wrap_angle(parabola_step(phi, h, gm, g0, gp));
      }
      // theta axis, clamped to the resolvable sector
      {
        const double tlo = std::max(0.0, theta - h);
        const double thi = std::min(opts.max_theta_rad, theta + h);
        const double gm = g(phi, tlo);
        const double g0 = g(phi, theta);
        const double gp = g(phi, thi);
        const double denom = gp - 2.0 * g0 + gm;
        if (std::abs(denom) > 1e-300) {
          double cand = theta - 0.5 * ((thi - theta) * (g0 - gm) / denom +
                                       (theta - tlo) * (gp - g0) / denom);
          cand = std::clamp(cand, tlo, thi);
          if (g(phi, cand) <= g0) theta = cand;
        }
      }
      h *= 0.25;
    }
    out.push_back(AzEl(wrap_angle(phi), std::clamp(theta, 0.0, opts.max_theta_rad)));
  }
  return out;
}

std::vector<int> mvdr_associate(const SnapshotBlock& block,
                                const UraConfig& cfg,
                                const std::vector<AzEl>& aoas,
                                const std::vector<double>& tones_hz) {
  if (aoas.size() != tones_hz.size()) {
    throw ConfigError("need exactly one candidate tone per direction");
  }
  const int k = static_cast<int>(aoas.size());
  if (k == 0) return {};
  const int n = cfg.elements();
  const int t_count = static_cast<int>(block.y.cols());

  CMat cov = block.y * block.y.adjoint() / double(t_count);
  cov.diagonal().array() += 1e-6 * cov.trace();  // loading for inversion
  const Eigen::LDLT<CMat> ldlt(cov);

  // Tone power of each beamformed output.
  Eigen::MatrixXd power(k, k);
  for (int b = 0; b < k; ++b) {
    const CVec a = steering_vector(cfg, aoas[b]);
    const CVec ra = ldlt.solve(a);
    const CVec w = ra / a.dot(ra).real();
    const Eigen::RowVectorXcd s = w.adjoint() * block.y;
    for (int j = 0; j < k; ++j) {
      const double wt = 2.0 * M_PI * tones_hz[j] / block.sample_rate;
      ComplexD acc = 0.0;
      for (int t = 0; t < t_count; ++t) {
        acc += s(t) * std::polar(1.0, -wt * t);
      }
      power(b, j) = std::norm(acc);
    }
  }

  Eigen::MatrixXd cost(k, k);
  for (int b = 0; b < k; ++b) {
    for (int j = 0; j < k; ++j) {
      cost(b, j) = -std::log(power(b, j) + 1e-300);
    }
  }
  const std::vector<int> assign = min_cost_assignment(cost);

  // A beam forced far off its own spectral peak means two directions fought
  // confidently over one tone.
  constexpr double kConfidentRatio = 100.0;  // 20 dB
  for (int b = 0; b < k; ++b) {
    int arg = 0;
    power.row(b).maxCoeff(&arg);
    if (arg != assign[b] &&
        power(b, arg) > kConfidentRatio * power(b, assign[b])) {
      throw AssociationError("two directions contend for tone " +
                             std::to_string(tones_hz[arg]));
    }
  }
  return assign;
}

}  // namespace wavepose
