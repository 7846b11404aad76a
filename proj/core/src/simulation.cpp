#include "rfda/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "rfda/error.hpp"
#include "rfda/rng.hpp"

namespace rfda {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kCalibrationSeed = 20200914;
constexpr int kCalibrationDraws = 1000000;

// Eigenvectors of the spd-ai design.
Mat ai_rotation() {
  Mat r(2, 2);
  r << 0.5, std::sqrt(3.0) / 2.0, std::sqrt(3.0) / 2.0, -0.5;
  return r;
}

Mat ai_basis(int k) {
  const Mat r = ai_rotation();
  const Vec r1 = r.col(0);
  const Vec r2 = r.col(1);
  switch (k) {
    case 0:
      return r1 * r1.transpose();
    case 1:
      return r2 * r2.transpose();
    default:
      return (r1 * r2.transpose() + r2 * r1.transpose()) / std::sqrt(2.0);
  }
}

Mat sphere_mean(double t) {
  Mat p(3, 1);
  p << std::cos(kPi * t / 2.0), std::sin(kPi * t / 2.0), 0.0;
  return p;
}

Mat sphere_e1(double t) {
  Mat e(3, 1);
  e << -std::sin(kPi * t / 2.0), std::cos(kPi * t / 2.0), 0.0;
  return e;
}

Mat sphere_e2() {
  Mat e(3, 1);
  e << 0.0, 0.0, 1.0;
  return e;
}

}  // namespace

Design parse_design(std::string_view name) {
  if (name == "sphere" || name == "sphere:2") return Design::sphere;
  if (name == "spd-lc" || name == "spd-lc:2") return Design::spd_lc;
  if (name == "spd-ai" || name == "spd-ai:2") return Design::spd_ai;
  if (name == "euclidean" || name == "euclidean:1") return Design::euclidean;
  throw ValidationError("unknown simulation design '" + std::string(name) + "'");
}

std::string_view to_string(Design design) {
  switch (design) {
    case Design::sphere:
      return "sphere";
    case Design::spd_lc:
      return "spd-lc";
    case Design::spd_ai:
      return "spd-ai";
    case Design::euclidean:
      return "euclidean";
  }
  return "?";
}

GeometryPtr design_geometry(Design design) {
  switch (design) {
    case Design::sphere:
      return make_geometry("sphere:2");
    case Design::spd_lc:
      return make_geometry("spd-lc:2");
    case Design::spd_ai:
      return make_geometry("spd-ai:2");
    case Design::euclidean:
      return make_geometry("euclidean:1");
  }
  throw ValidationError("unknown design");
}

int effect_count(Design design) { return design == Design::spd_lc ? 3 : 2; }

int noise_coordinates(Design design) {
  switch (design) {
    case Design::sphere:
      return 2;
    case Design::spd_lc:
      return 3;
    case Design::spd_ai:
      return 2;
    case Design::euclidean:
      return 1;
  }
  return 1;
}

Point design_point(Design design, double t, const Effects& z, const Noise& eps) {
  switch (design) {
    case Design::sphere: {
      const Mat v = (t * z[0] + eps[0]) * sphere_e1(t) + (t * z[1] + eps[1]) * sphere_e2();
      const double theta = v.norm();
      Mat p = sphere_mean(t);
      if (theta > 0) p = std::cos(theta) * p + (std::sin(theta) / theta) * v;
      return {p / p.norm()};
    }
    case Design::spd_lc: {
      Mat l = Mat::Zero(2, 2);
      l(0, 0) = std::exp(t + t * z[0] + eps[0]);
      l(1, 0) = t + t * z[2] + eps[2];
      l(1, 1) = std::exp(t + t * z[1] + eps[1]);
      return {linalg::symmetrize(l * l.transpose())};
    }
    case Design::spd_ai: {
      const Mat r = ai_rotation();
      Vec lam(2);
      lam << std::exp(t + t * z[0] + eps[0]), std::exp(t + t * z[1] + eps[1]);
      return {linalg::symmetrize(r * lam.asDiagonal() * r.transpose())};
    }
    case Design::euclidean: {
      Mat p(1, 1);
      p(0, 0) = t + t * z[0] + std::sin(kPi * t) * z[1] + eps[0];
      return {p};
    }
  }
  throw ValidationError("unknown design");
}

// ---------------------------------------------------------------- SimTruth

SimTruth::SimTruth(Design design, double noise_half_width, double snr)
    : design_(design), geom_(design_geometry(design)), a_(noise_half_width), snr_(snr) {}

Point SimTruth::mean(double t) const {
  switch (design_) {
    case Design::sphere:
      return {sphere_mean(t)};
    case Design::spd_lc: {
      Mat l(2, 2);
      l << std::exp(t), 0.0, t, std::exp(t);
      return {linalg::symmetrize(l * l.transpose())};
    }
    case Design::spd_ai:
      return {std::exp(t) * Mat::Identity(2, 2)};
    case Design::euclidean: {
      Mat p(1, 1);
      p(0, 0) = t;
      return {p};
    }
  }
  throw ValidationError("unknown design");
}

Frame SimTruth::frame(double t) const {
  const Point mu = mean(t);
  switch (design_) {
    case Design::sphere: {
      Mat v(3, 2);
      v.col(0) = sphere_e1(t);
      v.col(1) = sphere_e2();
      return geom_->make_frame(mu, v);
    }
    case Design::spd_lc:
      return static_cast<const SpdLogCholeskyGeometry&>(*geom_).coordinate_frame(mu);
    case Design::spd_ai: {
      Mat v(4, 3);
      for (int k = 0; k < 3; ++k) v.col(k) = linalg::vec(std::exp(t) * ai_basis(k));
      return geom_->make_frame(mu, v);
    }
    case Design::euclidean:
      return geom_->make_frame(mu, Mat::Identity(1, 1));
  }
  throw ValidationError("unknown design");
}

Mat SimTruth::covariance_coefficients(double s, double t) const {
  const double var = kEffectHalfWidth * kEffectHalfWidth / 3.0;
  switch (design_) {
    case Design::sphere:
      return s * t * var * Mat::Identity(2, 2);
    case Design::spd_lc:
      return s * t * var * Mat::Identity(3, 3);
    case Design::spd_ai: {
      Mat c = Mat::Zero(3, 3);
      c(0, 0) = c(1, 1) = s * t * var;
      return c;
    }
    case Design::euclidean: {
      Mat c(1, 1);
      c(0, 0) = (s * t + std::sin(kPi * s) * std::sin(kPi * t)) * var;
      return c;
    }
  }
  throw ValidationError("unknown design");
}

FiberElement SimTruth::covariance(double s, double t) const {
  return {frame(s), frame(t), covariance_coefficients(s, t)};
}

Vec SimTruth::signal_coefficients(double t, const Effects& z) const {
  switch (design_) {
    case Design::sphere:
      return Vec{{t * z[0], t * z[1]}};
    case Design::spd_lc:
      // coordinate order (log L00, L10, log L11)
      return Vec{{t * z[0], t * z[2], t * z[1]}};
    case Design::spd_ai:
      return Vec{{t * z[0], t * z[1], 0.0}};
    case Design::euclidean:
      return Vec{{t * z[0] + std::sin(kPi * t) * z[1]}};
  }
  throw ValidationError("unknown design");
}

// ---------------------------------------------------------------- generation

Simulation simulate(Design design, int n, double m, double snr, std::uint64_t seed,
                    const SimulationOptions& options) {
  if (n < 1) throw ValidationError("simulate: n must be at least 1");
  if (!(m >= 1)) throw ValidationError("simulate: m must be at least 1");
  if (!options.noise_half_width && !(snr > 0)) throw ValidationError("simulate: snr must be positive");
  if (options.noise_half_width && !(*options.noise_half_width >= 0))
    throw ValidationError("simulate: noise half-width must be nonnegative");

  const double a = options.noise_half_width ? *options.noise_half_width : snr_calibrate(design, snr);
  Simulation sim{SparseDataset{}, SimTruth(design, a, snr), {}};
  sim.data.geometry = sim.truth.geometry();
  sim.data.weights = options.weights;
  sim.data.subjects.reserve(n);
  sim.effects.reserve(n);

  for (int i = 0; i < n; ++i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const int mi = rng.poisson(m) + 2;
    Effects z{};
    for (double& zk : z) zk = rng.uniform(-kEffectHalfWidth, kEffectHalfWidth);
    std::vector<double> times(mi);
    for (double& t : times) t = rng.uniform();
    std::sort(times.begin(), times.end());

    Subject s;
    s.id = "s" + std::to_string(i);
    s.times = times;
    s.points.reserve(mi);
    for (double t : times) {
      Noise eps{};
      if (options.independent_noise) {
        for (double& e : eps) e = a > 0 ? rng.uniform(-a, a) : 0.0;
      } else {
        const double e = a > 0 ? rng.uniform(-a, a) : 0.0;
        eps = {e, e, e};
      }
      s.points.push_back(design_point(design, t, z, eps));
    }
    sim.data.subjects.push_back(std::move(s));
    sim.effects.push_back(z);
  }
  return sim;
}

double signal_energy(Design design, int draws, std::uint64_t seed) {
  if (draws < 1) throw ValidationError("signal_energy needs at least one draw");
  const SimTruth truth(design, 0.0, 0.0);
  const Geometry& geom = *truth.geometry();
  RandomStream rng(seed, 0);
  std::vector<double> vals(draws);
  for (int k = 0; k < draws; ++k) {
    const double t = rng.uniform();
    Effects z{};
    for (double& zk : z) zk = rng.uniform(-kEffectHalfWidth, kEffectHalfWidth);
    const Point mu = truth.mean(t);
    const Point x = design_point(design, t, z, Noise{});
    const Tangent v = geom.log(mu, x);
    vals[k] = geom.inner(mu, v, v);
  }
  // cascade sum keeps the estimate independent of draw count rounding drift
  double total = 0.0;
  std::size_t block = 4096;
  for (std::size_t start = 0; start < vals.size(); start += block) {
    double part = 0.0;
    for (std::size_t k = start; k < std::min(vals.size(), start + block); ++k) part += vals[k];
    total += part;
  }
  return total / draws;
}

double snr_calibrate(Design design, double target) {
  if (!(target > 0)) throw ValidationError("snr target must be positive");
  static std::mutex mu;
  static std::map<Design, double> energy_cache;
  double energy = 0.0;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = energy_cache.find(design);
    if (it == energy_cache.end())
      it = energy_cache.emplace(design, signal_energy(design, kCalibrationDraws, kCalibrationSeed)).first;
    energy = it->second;
  }
  // SNR = energy / (k a² / 3)
  return std::sqrt(3.0 * energy / (noise_coordinates(design) * target));
}

}  // namespace rfda
