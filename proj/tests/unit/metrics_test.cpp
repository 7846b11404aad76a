#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rfda/artifacts.hpp"
#include "rfda/error.hpp"
#include "rfda/experiment.hpp"
#include "rfda/metrics.hpp"
#include "rfda/stats.hpp"
#include "support/support.hpp"

using namespace rfda;
using namespace rfda::testing;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.design = Design::sphere;
  c.n = 50;
  c.m = 5;
  c.reps = 3;
  c.seed = 11;
  c.timing = false;
  c.pipeline.policy = BandwidthPolicy::fixed;
  c.pipeline.h_mu = 0.3;
  c.pipeline.h_cov = 0.3;
  c.pipeline.grid_points = 21;
  return c;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(SurfaceError, TruthScoresZero) {
  for (Design d : {Design::sphere, Design::spd_lc, Design::spd_ai}) {
    const SimTruth truth(d, 0.02, 5.0);
    const CovSurface s = truth_surface(truth, linspace(0, 1, 21));
    const SurfaceError e = surface_error(s, truth);
    EXPECT_LT(e.rmuie, 1e-10);
    EXPECT_LT(e.rrmise, 1e-10);
    EXPECT_LT(mean_sup_error(s.mean, truth), 1e-10);
  }
}

TEST(SurfaceError, ZeroAndScaledSurfaces) {
  const SimTruth truth(Design::spd_ai, 0.02, 5.0);
  CovSurface s = truth_surface(truth, linspace(0, 1, 21));
  CovSurface scaled = s;
  for (Mat& c : scaled.cells) c *= 1.1;
  const SurfaceError es = surface_error(scaled, truth);
  EXPECT_NEAR(es.rmuie, 0.1, 1e-9);
  EXPECT_NEAR(es.rrmise, 0.1, 1e-9);
  for (Mat& c : s.cells) c.setZero();
  const SurfaceError ez = surface_error(s, truth);
  EXPECT_NEAR(ez.rmuie, 1.0, 1e-12);
  EXPECT_NEAR(ez.rrmise, 1.0, 1e-12);
}

TEST(SurfaceError, EuclideanTrapezoidOracle) {
  const Simulation sim = simulate(Design::euclidean, 60, 6, 5.0, 41);
  const auto grid = linspace(0, 1, 21);
  const MeanCurve m = fit_mean(sim.data, 0.3, grid);
  const CovSurface s = fit_cov_surface(sim.data, m, 0.3);
  const auto w = trapezoid_weights(grid);
  double num = 0, den = 0, sup_num = 0, sup_den = 0;
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t h = 0; h < grid.size(); ++h) {
      const double c = sim.truth.covariance_coefficients(grid[g], grid[h])(0, 0);
      const double e = s.coef(g, h)(0, 0) - c;
      num += w[g] * w[h] * e * e;
      den += w[g] * w[h] * c * c;
      sup_num = std::max(sup_num, std::abs(e));
      sup_den = std::max(sup_den, std::abs(c));
    }
  const SurfaceError e = surface_error(s, sim.truth);
  EXPECT_NEAR(e.rrmise, std::sqrt(num / den), 1e-10);
  EXPECT_NEAR(e.rmuie, sup_num / sup_den, 1e-10);
  const Mat ce = cell_errors(s, sim.truth);
  EXPECT_EQ(ce.rows(), 21);
  EXPECT_NEAR(ce.maxCoeff(), sup_num, 1e-12);
}

TEST(SurfaceError, FrameInvariant) {
  const Simulation sim = simulate(Design::sphere, 80, 6, 5.0, 42);
  const auto grid = linspace(0, 1, 21);
  const MeanCurve m = fit_mean(sim.data, 0.3, grid);
  RandomStream rng(42, 1);
  std::vector<Mat> rot;
  for (std::size_t g = 0; g < grid.size(); ++g) rot.push_back(random_orthogonal(rng, 2));
  const SurfaceError a = surface_error(fit_cov_surface(sim.data, m, 0.3), sim.truth);
  const SurfaceError b = surface_error(fit_cov_surface(sim.data, m.reframed(rot), 0.3), sim.truth);
  EXPECT_NEAR(a.rmuie, b.rmuie, 1e-9);
  EXPECT_NEAR(a.rrmise, b.rrmise, 1e-9);
}

TEST(SurfaceError, GridRefinementIsStable) {
  const Simulation sim = simulate(Design::spd_lc, 100, 6, 5.0, 43);
  auto at = [&](int points) {
    const auto grid = linspace(0, 1, points);
    return surface_error(fit_cov_surface(sim.data, fit_mean(sim.data, 0.3, grid), 0.3), sim.truth);
  };
  const SurfaceError a = at(51), b = at(101);
  EXPECT_LT(std::abs(a.rrmise - b.rrmise), 0.02 * b.rrmise);
  EXPECT_LT(std::abs(a.rmuie - b.rmuie), 0.02 * b.rmuie);
}

TEST(Experiment, RepIsDeterministic) {
  const ExperimentConfig c = small_config();
  const RepResult a = run_rep(c, 2), b = run_rep(c, 2), other = run_rep(c, 1);
  ASSERT_TRUE(a.ok) << a.error;
  EXPECT_EQ(a.rrmise, b.rrmise);
  EXPECT_EQ(a.rmuie, b.rmuie);
  EXPECT_NE(a.rrmise, other.rrmise);
  EXPECT_EQ(a.h_cov, 0.3);
}

TEST(Experiment, SummaryMatchesTheCsv) {
  const ExperimentReport r = run_experiment(small_config());
  const auto rows = parse_csv(report_csv(r));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"design", "n", "m", "rep", "rmuie", "rrmise", "h_mu", "h_cov", "seconds"}));
  std::vector<double> rm, rr;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k][0], "sphere");
    EXPECT_EQ(rows[k][8], "0");
    rm.push_back(std::stod(rows[k][4]));
    rr.push_back(std::stod(rows[k][5]));
  }
  EXPECT_DOUBLE_EQ(r.rmuie_mean, mean_of(rm));
  EXPECT_DOUBLE_EQ(r.rrmise_mean, mean_of(rr));
  EXPECT_NEAR(r.rrmise_sd, sample_sd(rr), 1e-12 * r.rrmise_sd);
  EXPECT_EQ(r.failures, 0);
}

TEST(Experiment, ThreadsDoNotChangeTheReport) {
  ExperimentConfig c = small_config();
  const std::string one = report_csv(run_experiment(c));
  c.threads = 3;
  EXPECT_EQ(report_csv(run_experiment(c)), one);
}

TEST(Experiment, TooManyFailuresThrow) {
  ExperimentConfig c = small_config();
  c.pipeline.h_cov = 0.001;
  EXPECT_THROW(run_experiment(c), NumericalError);
}
