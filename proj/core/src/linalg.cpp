#include "rfda/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace rfda::linalg {

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat sqrtm_spd(const Mat& a) {
  return sym_apply(a, [](double x) { return std::sqrt(std::max(x, kEigenFloor)); });
}

Mat invsqrtm_spd(const Mat& a) {
  return sym_apply(a, [](double x) { return 1.0 / std::sqrt(std::max(x, kEigenFloor)); });
}

Mat logm_spd(const Mat& a) {
  return sym_apply(a, [](double x) { return std::log(std::max(x, kEigenFloor)); });
}

Mat expm_sym(const Mat& a) {
  return sym_apply(a, [](double x) { return std::exp(x); });
}

SqrtPair sqrt_pair_spd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Vec r = es.eigenvalues();
  Vec ir(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r(i) = std::sqrt(std::max(r(i), kEigenFloor));
    ir(i) = 1.0 / r(i);
  }
  const Mat& v = es.eigenvectors();
  return {v * r.asDiagonal() * v.transpose(), v * ir.asDiagonal() * v.transpose()};
}

Mat orthogonal_factor(const Mat& a) {
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(a.rows(), a.cols());
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < std::min(r.rows(), r.cols()); ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

}  // namespace rfda::linalg
