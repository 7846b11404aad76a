#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rfda/dataset.hpp"
#include "rfda/kernel.hpp"
#include "rfda/stats.hpp"

namespace rfda {

/// One observation inside the smoothing window.
struct WindowEntry {
  std::size_t subject = 0;
  std::size_t obs = 0;
  /// ŵ(T_ij, t, h).
  double weight = 0.0;
  /// λ_i ŵ(T_ij, t, h), the coefficient of d²(Y_ij, y) in the local objective.
  double effective = 0.0;
};

/// Local-linear weights at t. ŵ = K_h(T - t)(û₂ - û₁(T - t))/σ̂₀² with
/// û_k = Σ_i λ_i Σ_j K_h(T_ij - t)(T_ij - t)^k and σ̂₀² = û₀û₂ - û₁².
struct LocalWeights {
  double t = 0.0;
  double h = 0.0;
  double u0 = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  double sigma0_sq = 0.0;
  std::vector<WindowEntry> entries;
};

/// Throws NumericalError when fewer than two distinct times fall in
/// (t - h, t + h) or when σ̂₀² <= 1e-14.
LocalWeights local_weights(const SparseDataset& data, double t, double h,
                           KernelType kernel = KernelType::epanechnikov);
LocalWeights local_weights(const SparseDataset& data, std::span<const double> lambda, double t,
                           double h, KernelType kernel = KernelType::epanechnikov);

struct FrechetOptions {
  int max_iter = 200;
  /// Stop once ‖Σ w_i log(y, x_i)‖ <= tol · Σ|w_i|.
  double tol = 1e-10;
  double min_step = 1e-6;
};

struct FrechetResult {
  Point point;
  double gradient_norm = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes Σ w_i d²(y, x_i) by Riemannian gradient descent
/// y ← exp(y, τ Σ w_i log(y, x_i) / Σ|w_i|) with backtracking on τ. Weights may
/// be negative. The result reports whether the gradient tolerance was met.
FrechetResult frechet_minimize(const Geometry& geom, std::span<const Point> points,
                               std::span<const double> weights, const Point& init,
                               const FrechetOptions& options = {});

struct MeanOptions {
  KernelType kernel = KernelType::epanechnikov;
  FrechetOptions frechet;
  /// Accept grid points where the optimizer stopped above tolerance instead of
  /// throwing; the diagnostics record them either way.
  bool allow_unconverged = false;
};

struct MeanDiagnostics {
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Fitted mean on a time grid with its frame field.
struct MeanCurve {
  GeometryPtr geometry;
  std::vector<double> grid;
  std::vector<Point> points;
  /// frames[0] = onb(points[0]); frames[g] is frames[g-1] transported to points[g].
  std::vector<Frame> frames;
  double bandwidth = 0.0;
  KernelType kernel = KernelType::epanechnikov;
  std::vector<MeanDiagnostics> diagnostics;

  std::size_t size() const { return grid.size(); }
  /// Copy whose frame at grid point g is frames[g].rotated(rotations[g]).
  MeanCurve reframed(const std::vector<Mat>& rotations) const;
};

/// Local-linear Fréchet mean on the grid. The first grid point starts from
/// the kernel-weighted Fréchet mean (weights clamped at 0); later points are
/// warm-started from their predecessor, or from `init` when supplied.
MeanCurve fit_mean(const SparseDataset& data, double h, std::span<const double> grid,
                   const MeanOptions& options = {}, const MeanCurve* init = nullptr);

/// Frame field along the points: onb at the first point, then transported
/// between consecutive points.
std::vector<Frame> transported_frames(const Geometry& geom, const std::vector<Point>& points);

/// The mean at an arbitrary time inside the grid range.
struct MeanEval {
  Point point;
  Frame frame;
  Bracket bracket;
  /// Orthogonal maps taking frames[lower] and frames[lower+1] coefficients to
  /// `frame` coefficients after transport to `point`.
  Mat from_lower;
  Mat from_upper;
};

/// Geodesic interpolation between the bracketing grid points; the frame is
/// the lower grid frame transported to the interpolated point. Exact at grid
/// points.
MeanEval locate_mean(const MeanCurve& curve, double t);

struct PointFrame {
  Point point;
  Frame frame;
};
PointFrame eval_mean(const MeanCurve& curve, double t);

}  // namespace rfda
