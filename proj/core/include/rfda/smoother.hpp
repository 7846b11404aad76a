#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rfda/bundle.hpp"
#include "rfda/dataset.hpp"
#include "rfda/mean.hpp"

namespace rfda {

/// Local-linear moment sums at (s, t):
///   S_ab = Σ_i ν_i Σ_{j≠k} ϖ ((T_ij - s)/h)^a ((T_ik - t)/h)^b,
///   R_ab = the same sums of the raw covariances transported to (μ̂(s), μ̂(t)),
/// with ϖ = K_h(s - T_ij) K_h(t - T_ik).
struct MomentSums {
  double s = 0.0;
  double t = 0.0;
  double h = 0.0;
  double s00 = 0.0, s10 = 0.0, s01 = 0.0, s20 = 0.0, s11 = 0.0, s02 = 0.0;
  FiberElement r00, r10, r01;
  std::size_t pairs = 0;
};

/// Direct evaluation: every raw covariance in the window is built with
/// raw_cov and moved with bundle_transport. Throws NumericalError when fewer
/// than three pairs fall in the window.
MomentSums moment_sums(const SparseDataset& data, const MeanCurve& mean, double s, double t,
                       double h, KernelType kernel = KernelType::epanechnikov);

/// Denominator of the closed-form local-linear intercept.
double moment_denominator(double s00, double s10, double s01, double s20, double s11, double s02);

/// Intercept β₀ of the local-linear fit, solved entrywise in the frames of R₀₀.
FiberElement fit_cov_point(const MomentSums& sums);

struct CellDiagnostics {
  double denominator = 0.0;
  std::size_t pairs = 0;
  /// Multiplier c₀₀/den of R₀₀ in the intercept (a raw pair sitting exactly at
  /// the cell enters β₀ with weight ν ϖ times this).
  double center_weight = 0.0;
  bool ok = false;
  /// Error message for failed cells, which are filled from their nearest
  /// successful neighbour.
  std::string error;
};

/// Fitted covariance surface on the mean curve's grid, written in its frame
/// field: cell (g, h) holds the coefficients of Ĉ(t_g, t_h) from frames[g] to
/// frames[h].
struct CovSurface {
  MeanCurve mean;
  double bandwidth = 0.0;
  KernelType kernel = KernelType::epanechnikov;
  std::vector<Mat> cells;
  std::vector<CellDiagnostics> diagnostics;
  std::size_t failed_cells = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return mean.size(); }
  int dim() const { return mean.geometry->dim(); }
  const Mat& coef(std::size_t g, std::size_t h) const { return cells[g * size() + h]; }
  Mat& coef(std::size_t g, std::size_t h) { return cells[g * size() + h]; }
  FiberElement cell(std::size_t g, std::size_t h) const;

  /// Coefficients of Ĉ(s, t) in the frames of the two evaluations: bilinear
  /// interpolation of the four bracketing cells after moving each into the
  /// evaluation frames.
  Mat coefficients_at(const MeanEval& s, const MeanEval& t) const;
  FiberElement eval(double s, double t) const;
  /// ‖Ĉ(t_g, t_h)‖_G on the grid, row g, column h.
  Mat gnorm_grid() const;
};

struct CovOptions {
  KernelType kernel = KernelType::epanechnikov;
  /// The fit fails when more than this fraction of cells cannot be solved.
  double max_failed_fraction = 0.1;
};

/// Fits every grid cell and symmetrizes by adjoint averaging. The normal
/// equations at (t_h, t_g) are the transpose of those at (t_g, t_h), so the
/// upper triangle is solved and the lower one is its adjoint.
CovSurface fit_cov_surface(const SparseDataset& data, const MeanCurve& mean, double h,
                           const CovOptions& options = {});

/// Log-maps of the observations at μ̂(T_ij), transported to every grid point
/// closer than `reach` and written in that grid point's frame.
struct GridTangents {
  struct Entry {
    std::size_t g;
    Vec a;
  };
  double reach = 0.0;
  /// entries[i][j] lists the grid points near T_ij in increasing order.
  std::vector<std::vector<std::vector<Entry>>> entries;
};
GridTangents grid_tangents(const SparseDataset& data, const MeanCurve& mean, double reach);

/// Moment sums of every grid cell, accumulated separately for each group of
/// subjects (CV folds); cells are stored for g <= h only.
class MomentGrid {
 public:
  /// `cache` may hold tangents computed with any reach >= h.
  MomentGrid(const SparseDataset& data, const MeanCurve& mean, double h, KernelType kernel,
             const std::vector<int>& group_of_subject, int groups,
             const GridTangents* cache = nullptr);

  std::size_t size() const { return size_; }
  int dim() const { return d_; }
  int groups() const { return groups_; }
  /// Surface fitted from the sums of all groups except `excluded` (-1 keeps all).
  CovSurface solve(const MeanCurve& mean, double h, KernelType kernel, int excluded = -1,
                   double max_failed_fraction = 0.1) const;

 private:
  std::size_t stride() const { return 7 + 3 * static_cast<std::size_t>(d_) * d_; }
  std::size_t offset(int group, std::size_t g, std::size_t h) const {
    return ((static_cast<std::size_t>(group) * size_ + g) * size_ + h) * stride();
  }
  std::size_t size_;
  int d_;
  int groups_;
  std::vector<double> sums_;
};

/// Per-observation log-maps and their transports to nearby grid points,
/// shared by the smoother and the CV risk.
struct ObservationTangent {
  double time = 0.0;
  MeanEval at;
  /// Coefficients of Log_{μ̂(T)} Y in at.frame.
  Vec z;
};
std::vector<std::vector<ObservationTangent>> observation_tangents(const SparseDataset& data,
                                                                  const MeanCurve& mean);

struct NoiseVariance {
  double sigma2 = 0.0;
  double raw = 0.0;
};

inline constexpr double kNoiseFloor = 1e-10;

/// σ̂² = Σ_i Σ_j (n d m_i)⁻¹ (‖z_ij‖² - tr Ĉ(T_ij, T_ij)), floored at 1e-10.
NoiseVariance noise_variance(const SparseDataset& data, const MeanCurve& mean,
                             const CovSurface& surface);

}  // namespace rfda
