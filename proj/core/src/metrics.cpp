#include "rfda/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rfda/error.hpp"
#include "rfda/stats.hpp"

namespace rfda {

namespace {

struct CellNorms {
  Mat error;
  Mat truth;
};

CellNorms cell_norms(const CovSurface& surface, const MeanCurve& mean, const SimTruth& truth) {
  if (mean.grid != surface.mean.grid) throw ValidationError("metrics: mean and surface grids differ");
  const Geometry& geom = *mean.geometry;
  const std::size_t G = surface.size();
  // Transfer from the fitted frame field to the truth frames at each grid time.
  std::vector<Mat> transfer(G);
  std::vector<Frame> tframes(G);
  for (std::size_t g = 0; g < G; ++g) {
    tframes[g] = truth.frame(mean.grid[g]);
    transfer[g] = frame_transfer(geom, surface.mean.frames[g], tframes[g]);
  }
  CellNorms out{Mat(G, G), Mat(G, G)};
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t h = 0; h < G; ++h) {
      const Mat c = truth.covariance_coefficients(mean.grid[g], mean.grid[h]);
      const Mat moved = transfer[h] * surface.coef(g, h) * transfer[g].transpose();
      out.error(g, h) = (moved - c).norm();
      out.truth(g, h) = c.norm();
    }
  return out;
}

double integrate_sq(const Mat& values, const std::vector<double>& w) {
  std::vector<double> terms;
  terms.reserve(values.size());
  for (Eigen::Index g = 0; g < values.rows(); ++g)
    for (Eigen::Index h = 0; h < values.cols(); ++h)
      terms.push_back(w[g] * w[h] * values(g, h) * values(g, h));
  return pairwise_sum(terms);
}

SurfaceError errors_from(const CellNorms& n, const std::vector<double>& grid) {
  const std::vector<double> w = trapezoid_weights(grid);
  const double sup_truth = n.truth.maxCoeff();
  const double int_truth = integrate_sq(n.truth, w);
  if (!(sup_truth > 0) || !(int_truth > 0)) throw ValidationError("metrics: true covariance vanishes");
  return {n.error.maxCoeff() / sup_truth, std::sqrt(integrate_sq(n.error, w) / int_truth)};
}

}  // namespace

SurfaceError surface_error(const CovSurface& surface, const SimTruth& truth) {
  return errors_from(cell_norms(surface, surface.mean, truth), surface.mean.grid);
}

double rmuie(const CovSurface& surface, const SimTruth& truth, const MeanCurve& mean) {
  return errors_from(cell_norms(surface, mean, truth), mean.grid).rmuie;
}

double rrmise(const CovSurface& surface, const SimTruth& truth, const MeanCurve& mean) {
  return errors_from(cell_norms(surface, mean, truth), mean.grid).rrmise;
}

Mat cell_errors(const CovSurface& surface, const SimTruth& truth) {
  return cell_norms(surface, surface.mean, truth).error;
}

double mean_sup_error(const MeanCurve& mean, const SimTruth& truth) {
  double worst = 0.0;
  for (std::size_t g = 0; g < mean.size(); ++g)
    worst = std::max(worst, mean.geometry->dist(mean.points[g], truth.mean(mean.grid[g])));
  return worst;
}

}  // namespace rfda
