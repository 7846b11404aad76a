#pragma once

#include <string>
#include <vector>

#include "rfda/smoother.hpp"

namespace rfda {

/// Discretized covariance operator (Cu)(t) = ∫ C(s, t) u(s) ds on the grid.
/// Block (g, h) of `matrix` is E[z(t_g) z(t_h)ᵀ], i.e. the coefficients of
/// Ĉ(t_h, t_g); the stacked matrix is symmetric.
struct DiscreteOperator {
  std::vector<double> grid;
  /// Trapezoid weights w_g.
  std::vector<double> weights;
  int dim = 0;
  Mat matrix;
  /// W^{1/2} M W^{1/2}, symmetrized.
  Mat scaled;
};

/// Throws NumericalError when the scaled matrix is asymmetric beyond 1e-8
/// (relative to its largest entry).
DiscreteOperator discretize_operator(const CovSurface& surface);

struct EigenSystem {
  std::vector<double> grid;
  std::vector<double> weights;
  int dim = 0;
  /// Descending, clamped at 0.
  Vec eigenvalues;
  /// fields[k] is G×d: row g holds the frame coefficients of ψ_k(t_g).
  std::vector<Mat> fields;
  /// Sum of all (clamped) eigenvalues, not only the retained ones.
  double total_variance = 0.0;
  /// Most negative eigenvalue before clamping (0 if none).
  double most_negative = 0.0;

  int size() const { return static_cast<int>(fields.size()); }
};

/// Top-K eigenpairs; eigen-fields are orthonormal under the quadrature and
/// signed so that their largest-magnitude coefficient is positive.
EigenSystem eigenpairs(const DiscreteOperator& op, int k);

/// Frame coefficients of ψ_k at an evaluated mean point (bilinear in the
/// transported grid coefficients).
Vec eval_field(const EigenSystem& eig, int k, const MeanEval& at);

/// Linear system for one subject: z stacks the m_i coefficient vectors,
/// column k of `loadings` stacks ψ_k at the observation times, and
/// sigma = σ̂² I + [C_jl] with C_jl = E[z_j z_lᵀ].
struct BlupSystem {
  Vec z;
  Mat loadings;
  Mat sigma;
  /// The ridge σ̂² already added to the diagonal of `sigma`.
  double ridge = 0.0;
};

BlupSystem blup_system(const std::vector<ObservationTangent>& obs, const CovSurface& surface,
                       const EigenSystem& eig, double sigma2, int k);

struct BlupOptions {
  /// Floor the spectrum of Σ_i at σ̂², i.e. replace the Ĉ block by its
  /// positive part, instead of failing when Σ_i is not positive definite.
  bool clamp = false;
};

struct SubjectDiagnostics {
  double min_eigenvalue = 0.0;
  double condition = 0.0;
  bool clamped = false;
};

/// ξ_k = λ_k g_kᵀ Σ⁻¹ z by a Cholesky solve. Throws NumericalError naming the
/// subject when Σ is not positive definite (unless clamping is enabled).
Vec blup_solve(const BlupSystem& sys, const Vec& lambda, const std::string& id,
               const BlupOptions& options = {}, SubjectDiagnostics* diag = nullptr);

struct Scores {
  std::vector<std::string> ids;
  /// n×K.
  Mat xi;
  std::vector<SubjectDiagnostics> diagnostics;
};

Scores blup_scores(const SparseDataset& data, const MeanCurve& mean, const CovSurface& surface,
                   const EigenSystem& eig, const NoiseVariance& sigma2, int k,
                   const BlupOptions& options = {});

}  // namespace rfda
