#include "rfda/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfda/error.hpp"
#include "rfda/stats.hpp"

namespace rfda {

DiscreteOperator discretize_operator(const CovSurface& surface) {
  const std::size_t G = surface.size();
  const int d = surface.dim();
  if (G < 2) throw ValidationError("discretize_operator: the grid needs at least two points");
  DiscreteOperator op;
  op.grid = surface.mean.grid;
  op.weights = trapezoid_weights(op.grid);
  op.dim = d;
  const Eigen::Index n = static_cast<Eigen::Index>(G) * d;
  op.matrix.resize(n, n);
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t h = 0; h < G; ++h)
      op.matrix.block(static_cast<Eigen::Index>(g) * d, static_cast<Eigen::Index>(h) * d, d, d) =
          surface.coef(h, g);
  Vec root(n);
  for (std::size_t g = 0; g < G; ++g)
    root.segment(static_cast<Eigen::Index>(g) * d, d).setConstant(std::sqrt(op.weights[g]));
  op.scaled = root.asDiagonal() * op.matrix * root.asDiagonal();
  const double scale = std::max(1.0, linalg::max_abs(op.scaled));
  const double asym = linalg::max_abs(op.scaled - op.scaled.transpose());
  if (asym > 1e-8 * scale) {
    std::ostringstream os;
    os << "discretized covariance operator is not symmetric (max asymmetry " << asym << ")";
    throw NumericalError(os.str());
  }
  op.scaled = linalg::symmetrize(op.scaled);
  return op;
}

EigenSystem eigenpairs(const DiscreteOperator& op, int k) {
  const Eigen::Index n = op.scaled.rows();
  if (k < 1 || k > n) throw ValidationError("eigenpairs: K must lie in [1, G*d]");
  Eigen::SelfAdjointEigenSolver<Mat> es(op.scaled);
  if (es.info() != Eigen::Success) throw NumericalError("eigenpairs: eigendecomposition failed");
  const std::size_t G = op.grid.size();
  const int d = op.dim;

  EigenSystem eig;
  eig.grid = op.grid;
  eig.weights = op.weights;
  eig.dim = d;
  eig.eigenvalues.resize(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = es.eigenvalues()(i);
    eig.most_negative = std::min(eig.most_negative, lam);
    eig.total_variance += std::max(lam, 0.0);
  }
  for (int c = 0; c < k; ++c) {
    const Eigen::Index idx = n - 1 - c;
    eig.eigenvalues(c) = std::max(es.eigenvalues()(idx), 0.0);
    Vec v = es.eigenvectors().col(idx);
    Mat field(G, d);
    for (std::size_t g = 0; g < G; ++g)
      field.row(static_cast<Eigen::Index>(g)) =
          v.segment(static_cast<Eigen::Index>(g) * d, d).transpose() / std::sqrt(op.weights[g]);
    Eigen::Index r = 0, col = 0;
    const double big = field.cwiseAbs().maxCoeff(&r, &col);
    // first index in row-major order attaining the maximum
    for (Eigen::Index rr = 0; rr < field.rows(); ++rr) {
      bool found = false;
      for (Eigen::Index cc = 0; cc < field.cols(); ++cc) {
        if (std::abs(field(rr, cc)) == big) {
          r = rr;
          col = cc;
          found = true;
          break;
        }
      }
      if (found) break;
    }
    if (field(r, col) < 0) field = -field;
    eig.fields.push_back(std::move(field));
  }
  return eig;
}

Vec eval_field(const EigenSystem& eig, int k, const MeanEval& at) {
  const Mat& f = eig.fields.at(static_cast<std::size_t>(k));
  const int g = at.bracket.lower;
  const double a = at.bracket.fraction;
  Vec out = Vec::Zero(eig.dim);
  if (a < 1.0) out += (1.0 - a) * at.from_lower * f.row(g).transpose();
  if (a > 0.0) out += a * at.from_upper * f.row(g + 1).transpose();
  return out;
}

BlupSystem blup_system(const std::vector<ObservationTangent>& obs, const CovSurface& surface,
                       const EigenSystem& eig, double sigma2, int k) {
  if (k < 1 || k > eig.size()) throw ValidationError("blup: K exceeds the available eigenpairs");
  const int d = surface.dim();
  const Eigen::Index m = static_cast<Eigen::Index>(obs.size());
  BlupSystem sys;
  sys.z.resize(m * d);
  sys.loadings.resize(m * d, k);
  sys.sigma.resize(m * d, m * d);
  for (Eigen::Index j = 0; j < m; ++j) {
    sys.z.segment(j * d, d) = obs[j].z;
    for (int c = 0; c < k; ++c) sys.loadings.block(j * d, c, d, 1) = eval_field(eig, c, obs[j].at);
    for (Eigen::Index l = 0; l <= j; ++l) {
      // E[z_j z_lᵀ] is the coefficient matrix of Ĉ(T_l, T_j).
      const Mat c = surface.coefficients_at(obs[l].at, obs[j].at);
      sys.sigma.block(j * d, l * d, d, d) = c;
      sys.sigma.block(l * d, j * d, d, d) = c.transpose();
    }
  }
  sys.sigma = linalg::symmetrize(sys.sigma);
  sys.sigma.diagonal().array() += sigma2;
  sys.ridge = sigma2;
  return sys;
}

Vec blup_solve(const BlupSystem& sys, const Vec& lambda, const std::string& id,
               const BlupOptions& options, SubjectDiagnostics* diag) {
  if (lambda.size() != sys.loadings.cols()) throw ValidationError("blup: one eigenvalue per component");
  if (sys.z.size() == 0) return Vec::Zero(lambda.size());
  Eigen::SelfAdjointEigenSolver<Mat> es(sys.sigma, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  SubjectDiagnostics local;
  local.min_eigenvalue = lo;
  local.condition = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  Mat sigma = sys.sigma;
  const double floor = std::max(sys.ridge, kNoiseFloor);
  if (options.clamp && lo < floor) {
    sigma = linalg::sym_apply(sigma, [floor](double x) { return std::max(x, floor); });
    local.clamped = true;
  }
  Eigen::LLT<Mat> llt;
  if (local.clamped || lo > 0) llt.compute(sigma);
  if ((!local.clamped && lo <= 0) || llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "subject " << id << ": covariance of the observations is not positive definite "
       << "(smallest eigenvalue " << lo << ", condition " << local.condition << ")";
    throw NumericalError(os.str());
  }
  if (diag) *diag = local;
  const Vec alpha = llt.solve(sys.z);
  return lambda.cwiseProduct(sys.loadings.transpose() * alpha);
}

Scores blup_scores(const SparseDataset& data, const MeanCurve& mean, const CovSurface& surface,
                   const EigenSystem& eig, const NoiseVariance& sigma2, int k,
                   const BlupOptions& options) {
  if (k < 1 || k > eig.size()) throw ValidationError("blup: K exceeds the available eigenpairs");
  if (mean.grid != surface.mean.grid) throw ValidationError("blup: mean and surface grids differ");
  // Coefficients must be taken in the frame field the surface is written in.
  const auto obs = observation_tangents(data, surface.mean);
  const Vec lambda = eig.eigenvalues.head(k);
  Scores sc;
  sc.xi.resize(static_cast<Eigen::Index>(data.subjects.size()), k);
  sc.diagnostics.resize(data.subjects.size());
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    sc.ids.push_back(data.subjects[i].id);
    const BlupSystem sys = blup_system(obs[i], surface, eig, sigma2.sigma2, k);
    sc.xi.row(static_cast<Eigen::Index>(i)) =
        blup_solve(sys, lambda, data.subjects[i].id, options, &sc.diagnostics[i]).transpose();
  }
  return sc;
}

}  // namespace rfda
