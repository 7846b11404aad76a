#include <gtest/gtest.h>

#include <cmath>

#include "oracle/scalar_oracle.hpp"
#include "rfda/error.hpp"
#include "rfda/simulation.hpp"
#include "rfda/smoother.hpp"
#include "rfda/stats.hpp"
#include "support/support.hpp"

using namespace rfda;
using namespace rfda::testing;

namespace {

std::vector<oracle::Curve> curves_of(const SparseDataset& d) {
  std::vector<oracle::Curve> out;
  for (const Subject& s : d.subjects) {
    oracle::Curve c{s.times, {}};
    for (const Point& p : s.points) c.y.push_back(p.coords(0, 0));
    out.push_back(c);
  }
  return out;
}

MeanCurve flat_mean(const GeometryPtr& g, const Point& p, std::vector<double> grid) {
  MeanCurve m;
  m.geometry = g;
  m.grid = std::move(grid);
  m.points.assign(m.grid.size(), p);
  m.frames = transported_frames(*g, m.points);
  m.diagnostics.assign(m.grid.size(), {0.0, 0, true});
  m.bandwidth = 1.0;
  return m;
}

MomentSums sums_with(const Frame& f, double s00, double s10, double s01, double s20, double s11, double s02,
                     const Mat& r00, const Mat& r10, const Mat& r01) {
  MomentSums m;
  m.s00 = s00;
  m.s10 = s10;
  m.s01 = s01;
  m.s20 = s20;
  m.s11 = s11;
  m.s02 = s02;
  m.r00 = {f, f, r00};
  m.r10 = {f, f, r10};
  m.r01 = {f, f, r01};
  m.pairs = 10;
  return m;
}

}  // namespace

TEST(MomentSums, InsufficientPairs) {
  const SparseDataset d = scalar_dataset({{0.1, 0.9}, {0.2, 0.8}}, {{1, 2}, {3, 4}});
  const MeanCurve m = fit_mean(d, 1.0, linspace(0, 1, 3));
  EXPECT_THROW(moment_sums(d, m, 0.5, 0.5, 0.05), NumericalError);
}

TEST(MomentSums, PairsAtTheCell) {
  // three subjects, each with one observation at s and one at t
  const double s = 0.3, t = 0.7, h = 0.2;
  const SparseDataset d = scalar_dataset({{s, t}, {s, t}, {s, t}}, {{1, 2}, {2, 1}, {0.5, 0.5}});
  const MeanCurve m = flat_mean(d.geometry, {Mat::Zero(1, 1)}, linspace(0, 1, 11));
  const MomentSums ms = moment_sums(d, m, s, t, h);
  const double k0 = 0.75;
  EXPECT_EQ(ms.pairs, 3u);
  EXPECT_NEAR(ms.s00, 3.0 / 6.0 * k0 * k0 / (h * h), 1e-12);
  EXPECT_NEAR(ms.s10, 0.0, 1e-15);
  EXPECT_NEAR(ms.s01, 0.0, 1e-15);
  EXPECT_NEAR(ms.r00.coefficients()(0, 0), (2.0 + 2.0 + 0.25) / 6.0 * k0 * k0 / (h * h), 1e-12);
}

TEST(MomentSums, EuclideanScalarSums) {
  const Simulation sim = simulate(Design::euclidean, 40, 6, 5.0, 1);
  const std::vector<double> grid = linspace(0, 1, 11);
  const MeanCurve m = fit_mean(sim.data, 0.3, grid);
  const double s = 0.4, t = 0.55, h = 0.2;
  const MomentSums ms = moment_sums(sim.data, m, s, t, h);
  const auto nu = sim.data.cov_weights();
  double S[3][3] = {};
  double r00 = 0;
  for (std::size_t i = 0; i < sim.data.subjects.size(); ++i) {
    const Subject& sub = sim.data.subjects[i];
    for (std::size_t j = 0; j < sub.size(); ++j)
      for (std::size_t k = 0; k < sub.size(); ++k) {
        if (j == k) continue;
        const double x = (sub.times[j] - s) / h, y = (sub.times[k] - t) / h;
        const double w = nu[i] * oracle::epanechnikov(x) / h * oracle::epanechnikov(y) / h;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; a + b < 3; ++b) S[a][b] += w * std::pow(x, a) * std::pow(y, b);
        const double zj = sub.points[j].coords(0, 0) - eval_mean(m, sub.times[j]).point.coords(0, 0);
        const double zk = sub.points[k].coords(0, 0) - eval_mean(m, sub.times[k]).point.coords(0, 0);
        r00 += w * zj * zk;
      }
  }
  EXPECT_NEAR(ms.s00, S[0][0], 1e-12 * S[0][0]);
  EXPECT_NEAR(ms.s10, S[1][0], 1e-12 * S[0][0]);
  EXPECT_NEAR(ms.s01, S[0][1], 1e-12 * S[0][0]);
  EXPECT_NEAR(ms.s20, S[2][0], 1e-12 * S[0][0]);
  EXPECT_NEAR(ms.s11, S[1][1], 1e-12 * S[0][0]);
  EXPECT_NEAR(ms.s02, S[0][2], 1e-12 * S[0][0]);
  EXPECT_NEAR(ms.r00.coefficients()(0, 0), r00, 1e-12);
}

TEST(FitCovPoint, ReproducesConstantAndLinearFields) {
  const auto g = make_geometry("sphere:2");
  RandomStream rng(2, 0);
  const Frame f = g->onb(random_point(*g, rng));
  const double s00 = 2.0, s10 = 0.3, s01 = -0.2, s20 = 0.9, s11 = 0.1, s02 = 0.7;
  const Mat a = normal_matrix(rng, 2, 2), b = normal_matrix(rng, 2, 2), c = normal_matrix(rng, 2, 2);
  EXPECT_LT((fit_cov_point(sums_with(f, s00, s10, s01, s20, s11, s02, s00 * a, s10 * a, s01 * a)).coefficients() - a).norm(), 1e-10);
  const Mat r00 = s00 * a + s10 * b + s01 * c;
  const Mat r10 = s10 * a + s20 * b + s11 * c;
  const Mat r01 = s01 * a + s11 * b + s02 * c;
  EXPECT_LT((fit_cov_point(sums_with(f, s00, s10, s01, s20, s11, s02, r00, r10, r01)).coefficients() - a).norm(), 1e-9);
  EXPECT_THROW(fit_cov_point(sums_with(f, 1, 1, 1, 1, 1, 1, a, a, a)), NumericalError);
}

TEST(FitCovPoint, EuclideanMatchesNormalEquations) {
  const Simulation sim = simulate(Design::euclidean, 60, 6, 5.0, 3);
  const auto grid = linspace(0, 1, 21);
  const MeanCurve m = fit_mean(sim.data, 0.3, grid);
  std::vector<double> mean_vals;
  for (const Point& p : m.points) mean_vals.push_back(p.coords(0, 0));
  const auto curves = curves_of(sim.data);
  const auto z = oracle::residuals(curves, grid, mean_vals);
  for (auto [s, t] : {std::pair{0.2, 0.6}, std::pair{0.0, 1.0}, std::pair{0.5, 0.5}}) {
    const double got = fit_cov_point(moment_sums(sim.data, m, s, t, 0.25)).coefficients()(0, 0);
    EXPECT_NEAR(got, oracle::product_smoother(curves, z, s, t, 0.25), 1e-8);
  }
}

TEST(FitCovSurface, EuclideanMatchesProductSmoother) {
  const Simulation sim = simulate(Design::euclidean, 50, 6, 5.0, 4);
  const auto grid = linspace(0, 1, 11);
  const auto curves = curves_of(sim.data);
  const auto mu = oracle::mean_on_grid(curves, grid, 0.3);
  const auto cov = oracle::cov_on_grid(curves, oracle::residuals(curves, grid, mu), grid, 0.3);
  const CovSurface surf = fit_cov_surface(sim.data, fit_mean(sim.data, 0.3, grid), 0.3);
  EXPECT_EQ(surf.failed_cells, 0u);
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t h = 0; h < grid.size(); ++h) EXPECT_NEAR(surf.coef(g, h)(0, 0), cov[g][h], 1e-8);
}

TEST(FitCovSurface, GridSumsMatchDirectSums) {
  const Simulation sim = simulate(Design::sphere, 60, 6, 5.0, 5);
  const auto grid = linspace(0, 1, 9);
  const MeanCurve m = fit_mean(sim.data, 0.3, grid);
  const CovSurface surf = fit_cov_surface(sim.data, m, 0.25);
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t h = g; h < grid.size(); ++h) {
      const FiberElement direct = fit_cov_point(moment_sums(sim.data, m, grid[g], grid[h], 0.25));
      EXPECT_LT((direct.coefficients() - surf.coef(g, h)).norm(), 1e-10);
      EXPECT_TRUE(surf.coef(h, g) == surf.coef(g, h).transpose());
    }
}

TEST(FitCovSurface, NoiselessConstantProcessIsZero) {
  const auto g = make_geometry("spd-ai:2");
  RandomStream rng(6, 0);
  const Point p = random_point(*g, rng);
  SparseDataset d;
  d.geometry = g;
  for (int i = 0; i < 30; ++i) {
    Subject s;
    s.id = std::to_string(i);
    for (int j = 0; j < 5; ++j) s.times.push_back(rng.uniform());
    std::sort(s.times.begin(), s.times.end());
    s.points.assign(5, p);
    d.subjects.push_back(s);
  }
  const CovSurface surf = fit_cov_surface(d, fit_mean(d, 0.3, linspace(0, 1, 11)), 0.3);
  for (const Mat& c : surf.cells) EXPECT_LT(c.norm(), 1e-9);
}

TEST(FitCovSurface, FrameInvariance) {
  const Simulation sim = simulate(Design::spd_ai, 60, 5, 5.0, 7);
  const auto grid = linspace(0, 1, 11);
  const MeanCurve m = fit_mean(sim.data, 0.3, grid);
  RandomStream rng(7, 1);
  std::vector<Mat> rot;
  for (std::size_t g = 0; g < grid.size(); ++g) rot.push_back(random_orthogonal(rng, 3));
  const CovSurface a = fit_cov_surface(sim.data, m, 0.3);
  const CovSurface b = fit_cov_surface(sim.data, m.reframed(rot), 0.3);
  const Mat na = a.gnorm_grid(), nb = b.gnorm_grid();
  EXPECT_LT((na - nb).cwiseAbs().maxCoeff(), 1e-9);
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t h = 0; h < grid.size(); ++h)
      EXPECT_LT((b.coef(g, h) - rot[h] * a.coef(g, h) * rot[g].transpose()).norm(), 1e-9);
}

TEST(FitCovSurface, SchemesAgreeForEqualSizes) {
  Simulation sim = simulate(Design::sphere, 60, 5, 5.0, 8);
  for (Subject& s : sim.data.subjects) {
    s.times.resize(3);
    s.points.resize(3);
  }
  const auto grid = linspace(0, 1, 9);
  const MeanCurve m = fit_mean(sim.data, 0.3, grid);
  sim.data.weights = WeightScheme::obs_equal;
  const CovSurface a = fit_cov_surface(sim.data, m, 0.3);
  sim.data.weights = WeightScheme::subject_equal;
  const CovSurface b = fit_cov_surface(sim.data, m, 0.3);
  for (std::size_t k = 0; k < a.cells.size(); ++k) EXPECT_LT((a.cells[k] - b.cells[k]).norm(), 1e-10);
}

TEST(FitCovSurface, WarnsWhenWiderThanTheMean) {
  const Simulation sim = simulate(Design::sphere, 40, 5, 5.0, 9);
  const auto grid = linspace(0, 1, 6);
  const MeanCurve m = fit_mean(sim.data, 0.2, grid);
  EXPECT_TRUE(fit_cov_surface(sim.data, m, 0.15).warnings.empty());
  EXPECT_FALSE(fit_cov_surface(sim.data, m, 0.4).warnings.empty());
}

TEST(FitCovSurface, FailedCellsAreFilledOrRejected) {
  const Simulation sim = simulate(Design::euclidean, 40, 5, 5.0, 10);
  const auto grid = linspace(0, 1, 21);
  const MeanCurve m = fit_mean(sim.data, 0.3, grid);
  EXPECT_THROW(fit_cov_surface(sim.data, m, 0.01), NumericalError);
}

TEST(NoiseVariance, HandComputation) {
  // zero mean, constant surface c: σ² = Σ_i Σ_j (z_ij² - c) / (n m_i)
  const double c = 0.01;
  const SparseDataset d = scalar_dataset({{0.1, 0.4, 0.8}, {0.2, 0.9}}, {{0.3, -0.2, 0.1}, {0.5, -0.4}});
  CovSurface surf;
  surf.mean = flat_mean(d.geometry, {Mat::Zero(1, 1)}, {0.0, 0.5, 1.0});
  surf.cells.assign(9, Mat::Constant(1, 1, c));
  surf.diagnostics.assign(9, {});
  const double want = ((0.09 - c) + (0.04 - c) + (0.01 - c)) / (2.0 * 3.0) + ((0.25 - c) + (0.16 - c)) / (2.0 * 2.0);
  const NoiseVariance nv = noise_variance(d, surf.mean, surf);
  EXPECT_NEAR(nv.raw, want, 1e-12);
  EXPECT_NEAR(nv.sigma2, want, 1e-12);

  surf.cells.assign(9, Mat::Constant(1, 1, 1.0));
  const NoiseVariance floored = noise_variance(d, surf.mean, surf);
  EXPECT_LT(floored.raw, 0.0);
  EXPECT_EQ(floored.sigma2, kNoiseFloor);
}

TEST(NoiseVariance, EuclideanMatchesOracle) {
  const Simulation sim = simulate(Design::euclidean, 50, 6, 5.0, 11);
  const auto grid = linspace(0, 1, 11);
  const auto curves = curves_of(sim.data);
  const auto mu = oracle::mean_on_grid(curves, grid, 0.3);
  const auto z = oracle::residuals(curves, grid, mu);
  const auto cov = oracle::cov_on_grid(curves, z, grid, 0.3);
  const MeanCurve m = fit_mean(sim.data, 0.3, grid);
  EXPECT_NEAR(noise_variance(sim.data, m, fit_cov_surface(sim.data, m, 0.3)).sigma2,
              oracle::noise_variance(curves, z, grid, cov), 1e-8);
}

TEST(NoiseVariance, SphereRecoversTheNoiseLevel) {
  // shared scalar noise on both coordinates: E‖ε‖²/d = a²/3
  std::vector<double> est;
  double a = 0;
  for (int rep = 0; rep < 3; ++rep) {
    const Simulation sim = simulate(Design::sphere, 400, 20, 5.0, 100 + rep);
    a = sim.truth.noise_half_width();
    const auto grid = linspace(0, 1, 26);
    const MeanCurve m = fit_mean(sim.data, 0.2, grid);
    est.push_back(noise_variance(sim.data, m, fit_cov_surface(sim.data, m, 0.2)).sigma2);
  }
  EXPECT_NEAR(mean_of(est), a * a / 3.0, 0.25 * a * a / 3.0);
}
