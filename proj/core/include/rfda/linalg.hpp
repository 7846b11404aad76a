#pragma once

#include <Eigen/Dense>

namespace rfda {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace linalg {

/// Smallest eigenvalue admitted before taking logarithms of SPD matrices.
inline constexpr double kEigenFloor = 1e-14;

/// V f(Λ) Vᵀ for a symmetric A = V Λ Vᵀ.
template <class F>
Mat sym_apply(const Mat& a, F&& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Vec lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = f(lam(i));
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Mat symmetrize(const Mat& a);
Mat sqrtm_spd(const Mat& a);
Mat invsqrtm_spd(const Mat& a);
Mat logm_spd(const Mat& a);
Mat expm_sym(const Mat& a);

/// Square root and inverse square root from one decomposition.
struct SqrtPair {
  Mat root;
  Mat inv_root;
};
SqrtPair sqrt_pair_spd(const Mat& a);

/// Column-major flattening, the convention used for metric tensors.
inline Vec vec(const Mat& a) { return Eigen::Map<const Vec>(a.data(), a.size()); }
inline Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

/// Largest absolute entry; 0 for empty matrices.
inline double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

/// Orthogonal matrix from the QR factorization of a square matrix, with the
/// sign convention R_ii > 0 so the result is a deterministic function of a.
Mat orthogonal_factor(const Mat& a);

}  // namespace linalg
}  // namespace rfda
