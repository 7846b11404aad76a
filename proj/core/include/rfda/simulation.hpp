#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rfda/bundle.hpp"
#include "rfda/dataset.hpp"

namespace rfda {

/// Simulation designs. sphere, spd-lc and spd-ai are the three manifold
/// designs; euclidean is a scalar two-factor design on R used to check the
/// pipeline against classical sparse-FDA computations.
enum class Design { sphere, spd_lc, spd_ai, euclidean };

/// Accepts "sphere", "spd-lc", "spd-ai", "euclidean" or the matching geometry
/// descriptors ("sphere:2", "spd-lc:2", "spd-ai:2", "euclidean:1").
Design parse_design(std::string_view name);
std::string_view to_string(Design design);
GeometryPtr design_geometry(Design design);

/// Random effects Z (unused entries are ignored by a design).
using Effects = std::array<double, 3>;
/// Per-coordinate measurement noise; the shared-noise model repeats one value.
using Noise = std::array<double, 3>;

/// Half-width of the Uniform(-b, b) law of every random effect.
inline constexpr double kEffectHalfWidth = 0.1;

int effect_count(Design design);
/// Number of coordinates carrying noise; E∫‖ε(t)‖²dt = noise_coordinates·a²/3.
int noise_coordinates(Design design);

/// The generator's closed form: the observation at time t for effects z and
/// noise eps.
Point design_point(Design design, double t, const Effects& z, const Noise& eps);

/// True mean and covariance of a design.
class SimTruth {
 public:
  SimTruth() = default;
  SimTruth(Design design, double noise_half_width, double snr);

  Design design() const { return design_; }
  const GeometryPtr& geometry() const { return geom_; }
  double noise_half_width() const { return a_; }
  double snr() const { return snr_; }

  Point mean(double t) const;
  /// Parallel orthonormal frame along the mean in which the covariance has
  /// the closed forms below.
  Frame frame(double t) const;
  /// Coefficients of C(s,t) in frame(s) → frame(t).
  Mat covariance_coefficients(double s, double t) const;
  FiberElement covariance(double s, double t) const;
  /// frame(t)-coefficients of Log_{μ(t)} X(t) for effects z.
  Vec signal_coefficients(double t, const Effects& z) const;

 private:
  Design design_ = Design::sphere;
  GeometryPtr geom_;
  double a_ = 0.0;
  double snr_ = 0.0;
};

struct SimulationOptions {
  /// Draw a separate noise value per coordinate instead of one shared scalar.
  bool independent_noise = false;
  /// Fixes the noise half-width a (0 gives noiseless data) instead of
  /// calibrating it from the SNR target.
  std::optional<double> noise_half_width;
  WeightScheme weights = WeightScheme::obs_equal;
};

struct Simulation {
  SparseDataset data;
  SimTruth truth;
  /// Random effects drawn for each subject.
  std::vector<Effects> effects;
};

/// m_i ~ Poisson(m) + 2, T_ij ~ Uniform(0,1), Z ~ Uniform(-0.1, 0.1),
/// ε ~ Uniform(-a, a). Subject i draws from its own stream derived from
/// (seed, i), so the output does not depend on scheduling.
Simulation simulate(Design design, int n, double m, double snr, std::uint64_t seed,
                    const SimulationOptions& options = {});

/// Monte Carlo estimate of E∫‖Log_{μ(t)} X(t)‖² dt.
double signal_energy(Design design, int draws, std::uint64_t seed);

/// Noise half-width a giving the requested signal-to-noise ratio: the
/// signal energy by Monte Carlo (10⁶ draws, fixed seed), the noise energy
/// analytically. Results are memoized.
double snr_calibrate(Design design, double target);

}  // namespace rfda
