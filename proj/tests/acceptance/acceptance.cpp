// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/scalar_oracle.hpp"
#include "rfda/artifacts.hpp"
#include "rfda/bundle.hpp"
#include "rfda/error.hpp"
#include "rfda/experiment.hpp"
#include "rfda/fpca.hpp"
#include "rfda/metrics.hpp"
#include "rfda/simulation.hpp"
#include "rfda/stats.hpp"
#include "support/support.hpp"

using namespace rfda;
using namespace rfda::testing;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

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

CovSurface surface_from(const MeanCurve& m, const std::function<Mat(std::size_t, std::size_t)>& c) {
  CovSurface s;
  s.mean = m;
  s.bandwidth = 0.1;
  const std::size_t n = m.size();
  s.cells.resize(n * n);
  s.diagnostics.assign(n * n, {});
  for (std::size_t g = 0; g < n; ++g)
    for (std::size_t h = 0; h < n; ++h) s.coef(g, h) = c(g, h);
  return s;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

ExperimentConfig table_config(Design d, int n, double m, int reps) {
  ExperimentConfig c;
  c.design = d;
  c.n = n;
  c.m = m;
  c.reps = reps;
  c.seed = 20240601;
  c.timing = false;
  return c;
}

// 1. geometry invariants over 10³ random cases per geometry
void geometry_suite(Verdict& v) {
  const auto t0 = Clock::now();
  double round_trip = 0, isometry = 0, midpoint = 0, flat = 0, gauss_bonnet = 0;
  int cases = 0;
  for (const auto& g : all_geometries()) {
    RandomStream rng(101, 0);
    const bool is_flat = g->kind() == GeometryKind::euclidean || g->kind() == GeometryKind::spd_log_cholesky;
    for (int k = 0; k < 1000; ++k, ++cases) {
      const Point p = random_point(*g, rng);
      const Tangent t = random_tangent(*g, p, rng, rng.uniform());
      round_trip = std::max(round_trip, (g->log(p, g->exp(p, t)).components - t.components).norm());
      const Point q = nearby(*g, p, rng, 1.0);
      const Tangent l = g->log(p, q);
      const double d = g->dist(p, q);
      isometry = std::max(isometry, std::abs(g->norm(p, l) - d));
      const Tangent w = random_tangent(*g, p, rng, 1.0);
      isometry = std::max(isometry, std::abs(g->norm(q, g->transport(p, q, w)) - 1.0));
      midpoint = std::max(midpoint, std::abs(g->dist(p, g->exp(p, {p, 0.5 * l.components})) - 0.5 * d));
      if (is_flat) {
        const Point r = random_point(*g, rng);
        const Tangent direct = g->transport(p, q, w);
        const Tangent via = g->transport(r, q, g->transport(p, r, w));
        flat = std::max(flat, (direct.components - via.components).norm());
      }
      if (g->kind() == GeometryKind::sphere) {
        const Point b = nearby(*g, p, rng, 0.2), c = nearby(*g, p, rng, 0.2);
        const Tangent back = g->transport(c, p, g->transport(b, c, g->transport(p, b, w)));
        const double angle = std::acos(std::clamp(g->inner(p, w, back), -1.0, 1.0));
        const Eigen::Vector3d x = p.coords.col(0), y = b.coords.col(0), z = c.coords.col(0);
        const double excess =
            2.0 * std::atan2(std::abs(x.dot(y.cross(z))), 1.0 + x.dot(y) + y.dot(z) + z.dot(x));
        gauss_bonnet = std::max(gauss_bonnet, std::abs(angle - excess));
      }
    }
  }
  const double secs = seconds_since(t0);
  v.detail << cases << " cases; round-trip " << fmt(round_trip) << ", isometry " << fmt(isometry) << ", midpoint "
           << fmt(midpoint) << ", flatness " << fmt(flat) << ", Gauss-Bonnet " << fmt(gauss_bonnet) << "; "
           << fmt(secs) << " s";
  v.require(round_trip <= 1e-8, "round trip");
  v.require(isometry <= 1e-9, "isometry");
  v.require(midpoint <= 1e-9, "midpoint");
  v.require(flat <= 1e-10, "flatness");
  v.require(gauss_bonnet <= 1e-6, "Gauss-Bonnet");
  v.require(secs < 5.0, "time");
}

// 2. bundle norm preservation, linear-order defect on the sphere, zero holonomy on spd-lc
void bundle_suite(Verdict& v) {
  const auto t0 = Clock::now();
  double norm_err = 0;
  for (const auto& g : all_geometries()) {
    RandomStream rng(201, 0);
    for (int k = 0; k < 500; ++k) {
      const Point p = random_point(*g, rng), q = nearby(*g, p, rng, 1.0);
      const FiberElement c(g->onb(p), g->onb(q), normal_matrix(rng, g->dim(), g->dim()));
      const FiberElement moved =
          bundle_transport(*g, c, g->onb(nearby(*g, p, rng, 0.7)), g->onb(nearby(*g, q, rng, 0.7)));
      norm_err = std::max(norm_err, std::abs(bundle_norm(*g, moved) - bundle_norm(*g, c)) / bundle_norm(*g, c));
    }
  }

  // defect against d(p1,q1)+d(p2,q2) in a cap of radius 0.5 around the pole
  const auto s = make_geometry("sphere:2");
  const Point pole{Mat(Vec::Unit(3, 2))};
  RandomStream rng(202, 0);
  double c_hat = 0;
  for (int k = 0; k < 10000; ++k) {
    const Point p1 = nearby(*s, pole, rng, 0.5), p2 = nearby(*s, pole, rng, 0.5), q1 = nearby(*s, pole, rng, 0.5),
                q2 = nearby(*s, pole, rng, 0.5), y = nearby(*s, pole, rng, 0.5);
    const double dsum = s->dist(p1, q1) + s->dist(p2, q2);
    if (dsum > 1e-6) c_hat = std::max(c_hat, holonomy_defect(*s, p1, p2, q1, q2, y) / dsum);
  }
  std::vector<double> logd, logdef;
  for (int k = 0; k < 200; ++k) {
    const Point p1 = nearby(*s, pole, rng, 0.4), p2 = nearby(*s, pole, rng, 0.4), y = nearby(*s, pole, rng, 0.4);
    const Tangent u1 = random_tangent(*s, p1, rng, 1.0), u2 = random_tangent(*s, p2, rng, 1.0);
    for (double eps : {0.1, 0.05, 0.025, 0.0125, 0.00625}) {
      const Point q1 = s->exp(p1, {p1, eps * u1.components}), q2 = s->exp(p2, {p2, eps * u2.components});
      logd.push_back(std::log(s->dist(p1, q1) + s->dist(p2, q2)));
      logdef.push_back(std::log(holonomy_defect(*s, p1, p2, q1, q2, y)));
    }
  }
  const double order = slope(logd, logdef);

  const auto lc = make_geometry("spd-lc:2");
  double loop = 0, identity = 0;
  for (int k = 0; k < 1000; ++k) {
    const Point p1 = random_point(*lc, rng), p2 = random_point(*lc, rng), q1 = random_point(*lc, rng),
                q2 = random_point(*lc, rng), y = random_point(*lc, rng);
    loop = std::max(loop, loop_holonomy(*lc, p1, p2, q1, q2, random_tangent(*lc, q2, rng, 1.0)));
    identity = std::max(identity, std::abs(holonomy_defect(*lc, p1, p2, q1, q2, y) - lc->dist(p2, q2)));
  }
  const double secs = seconds_since(t0);
  v.detail << "norm " << fmt(norm_err) << ", sphere defect order " << fmt(order) << " (c^=" << fmt(c_hat)
           << "), spd-lc loop holonomy " << fmt(loop) << " (defect-d(p2,q2) " << fmt(identity) << "); " << fmt(secs)
           << " s";
  v.require(norm_err <= 1e-9, "norm preservation");
  v.require(order >= 0.9, "defect order");
  v.require(loop <= 1e-9 && identity <= 1e-9, "flat holonomy");
  v.require(secs < 30.0, "time");
}

// 3. Euclidean(1) pipeline against the scalar implementation
void oracle_suite(Verdict& v) {
  const auto t0 = Clock::now();
  double mean_err = 0, cov_err = 0, s2_err = 0, xi_err = 0;
  for (std::uint64_t seed : {301, 302, 303}) {
    const Simulation sim = simulate(Design::euclidean, 80, 6, 5.0, seed);
    const auto grid = linspace(0, 1, 31);
    const auto curves = curves_of(sim.data);
    const auto mu = oracle::mean_on_grid(curves, grid, 0.3);
    const auto z = oracle::residuals(curves, grid, mu);
    const auto cov = oracle::cov_on_grid(curves, z, grid, 0.25);
    const double sigma2 = oracle::noise_variance(curves, z, grid, cov);
    const auto oe = oracle::eigen(grid, cov, 2);
    const auto ob = oracle::blup(curves, z, grid, cov, oe, sigma2, 2, true);

    const MeanCurve m = fit_mean(sim.data, 0.3, grid);
    const CovSurface s = fit_cov_surface(sim.data, m, 0.25);
    const NoiseVariance nv = noise_variance(sim.data, m, s);
    const EigenSystem e = eigenpairs(discretize_operator(s), 2);
    const Scores sc = blup_scores(sim.data, m, s, e, nv, 2, {.clamp = true});
    for (std::size_t g = 0; g < grid.size(); ++g) {
      mean_err = std::max(mean_err, std::abs(m.points[g].coords(0, 0) - mu[g]));
      for (std::size_t h = 0; h < grid.size(); ++h) cov_err = std::max(cov_err, std::abs(s.coef(g, h)(0, 0) - cov[g][h]));
    }
    s2_err = std::max(s2_err, std::abs(nv.sigma2 - sigma2));
    for (std::size_t i = 0; i < curves.size(); ++i)
      for (int k = 0; k < 2; ++k) xi_err = std::max(xi_err, std::abs(sc.xi(i, k) - ob[i][k]));
  }
  const double secs = seconds_since(t0);
  v.detail << "mean " << fmt(mean_err) << ", surface " << fmt(cov_err) << ", sigma2 " << fmt(s2_err) << ", scores "
           << fmt(xi_err) << "; " << fmt(secs) << " s";
  v.require(std::max({mean_err, cov_err, s2_err, xi_err}) <= 1e-8, "tolerance");
  v.require(secs < 10.0, "time");
}

// 4. random re-framing leaves inner products, fitted errors and scores unchanged
void frame_suite(Verdict& v) {
  const auto t0 = Clock::now();
  double inner_err = 0, metric_err = 0, score_err = 0;
  for (const auto& g : all_geometries()) {
    RandomStream rng(401, 0);
    for (int k = 0; k < 200; ++k) {
      const Point p = random_point(*g, rng), q = nearby(*g, p, rng, 1.0);
      const FiberElement a(g->onb(p), g->onb(q), normal_matrix(rng, g->dim(), g->dim()));
      const FiberElement b(g->onb(p), g->onb(q), normal_matrix(rng, g->dim(), g->dim()));
      const Frame fp = g->onb(p).rotated(random_orthogonal(rng, g->dim()));
      const Frame fq = g->onb(q).rotated(random_orthogonal(rng, g->dim()));
      inner_err = std::max(inner_err, std::abs(bundle_inner(*g, a, b) -
                                               bundle_inner(*g, a.reframed(*g, fp, fq), b.reframed(*g, fp, fq))));
    }
  }
  for (Design d : {Design::sphere, Design::spd_lc, Design::spd_ai}) {
    const Simulation sim = simulate(d, 100, 5, 5.0, 402);
    const auto grid = linspace(0, 1, 31);
    const MeanCurve m = fit_mean(sim.data, 0.3, grid);
    RandomStream rng(403, 0);
    std::vector<Mat> rot;
    const int dim = m.geometry->dim();
    for (std::size_t g = 0; g < grid.size(); ++g) rot.push_back(random_orthogonal(rng, dim));
    auto run = [&](const MeanCurve& mean) {
      const CovSurface s = fit_cov_surface(sim.data, mean, 0.3);
      const EigenSystem e = eigenpairs(discretize_operator(s), 3);
      const Scores sc = blup_scores(sim.data, mean, s, e, noise_variance(sim.data, mean, s), 3, {.clamp = true});
      return std::tuple{surface_error(s, sim.truth), e, sc};
    };
    const auto [ea, eiga, sa] = run(m);
    const auto [eb, eigb, sb] = run(m.reframed(rot));
    metric_err = std::max({metric_err, std::abs(ea.rmuie - eb.rmuie), std::abs(ea.rrmise - eb.rrmise)});
    for (int k = 0; k < 3; ++k) {
      // the eigen-field is the same map; its sign convention follows the frame
      const double sign = (rot[0] * eiga.fields[k].row(0).transpose()).dot(eigb.fields[k].row(0).transpose()) +
                                      (rot.back() * eiga.fields[k].row(grid.size() - 1).transpose())
                                          .dot(eigb.fields[k].row(grid.size() - 1).transpose()) >= 0
                              ? 1.0
                              : -1.0;
      score_err = std::max(score_err, (sign * sa.xi.col(k) - sb.xi.col(k)).cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  v.detail << "bundle_inner " << fmt(inner_err) << ", rMUIE/rRMISE " << fmt(metric_err) << ", scores "
           << fmt(score_err) << "; " << fmt(secs) << " s";
  v.require(std::max({inner_err, metric_err, score_err}) <= 1e-8, "tolerance");
  v.require(secs < 60.0, "time");
}

// 5. desk-scale Table 2 cells
void table_suite(Verdict& v) {
  const auto t0 = Clock::now();
  const ExperimentReport sphere = run_experiment(table_config(Design::sphere, 100, 5, 100));
  const ExperimentReport lc = run_experiment(table_config(Design::spd_lc, 100, 5, 100));
  v.detail << "sphere rRMISE " << fmt(sphere.rrmise_mean) << "% (SD " << fmt(sphere.rrmise_sd) << "), spd-lc "
           << fmt(lc.rrmise_mean) << "% (SD " << fmt(lc.rrmise_sd) << "); " << fmt(seconds_since(t0)) << " s";
  v.require(sphere.rrmise_mean >= 14 && sphere.rrmise_mean <= 28, "sphere range");
  v.require(lc.rrmise_mean >= 18 && lc.rrmise_mean <= 35, "spd-lc range");
}

// 6. rate trend in n at m=20 and the m phase transition at n=400
void rate_suite(Verdict& v) {
  const auto t0 = Clock::now();
  std::vector<double> logn, logr, r;
  for (int n : {100, 200, 400}) {
    const double e = run_experiment(table_config(Design::sphere, n, 20, 20)).rrmise_mean;
    r.push_back(e);
    logn.push_back(std::log(n));
    logr.push_back(std::log(e));
  }
  const double m5 = run_experiment(table_config(Design::sphere, 400, 5, 20)).rrmise_mean;
  const double m30 = run_experiment(table_config(Design::sphere, 400, 30, 20)).rrmise_mean;
  const double b = slope(logn, logr);
  const double d1 = m5 - r[2], d2 = r[2] - m30;
  v.detail << "rRMISE(n=100,200,400; m=20) " << fmt(r[0]) << ", " << fmt(r[1]) << ", " << fmt(r[2]) << "%, slope "
           << fmt(b) << "; n=400 m=5/20/30 " << fmt(m5) << "/" << fmt(r[2]) << "/" << fmt(m30) << ", delta "
           << fmt(d1) << " vs 3x" << fmt(d2) << "; " << fmt(seconds_since(t0)) << " s";
  v.require(r[0] > r[1] && r[1] > r[2], "strictly decreasing");
  v.require(b >= -0.45 && b <= -0.20, "slope in [-0.45, -0.20]");
  v.require(d1 > 3 * d2, "phase transition");
}

// 7. spectrum oracles
void spectrum_suite(Verdict& v) {
  const auto e1 = make_geometry("euclidean:1");
  const MeanCurve bm_mean = flat_mean(e1, {Mat::Zero(1, 1)}, linspace(0, 1, 101));
  const CovSurface bm = surface_from(bm_mean, [&](std::size_t g, std::size_t h) {
    return Mat::Constant(1, 1, std::min(bm_mean.grid[g], bm_mean.grid[h]));
  });
  const EigenSystem eb = eigenpairs(discretize_operator(bm), 1);
  const double pi = std::numbers::pi;
  const double top_err = std::abs(eb.eigenvalues(0) - 4 / (pi * pi)) / (4 / (pi * pi));

  // rank one: C(s,t) = φ(s) φ(t)ᵀ with a random field φ on the sphere
  const auto s2 = make_geometry("sphere:2");
  const MeanCurve m = flat_mean(s2, {Mat(Vec::Unit(3, 2))}, linspace(0, 1, 41));
  RandomStream rng(701, 0);
  const Mat phi = normal_matrix(rng, 41, 2);
  const CovSurface r1 = surface_from(m, [&](std::size_t g, std::size_t h) {
    return Mat(phi.row(h).transpose() * phi.row(g));
  });
  const DiscreteOperator op1 = discretize_operator(r1);
  const EigenSystem e1s = eigenpairs(op1, 3);
  double want = 0;
  for (int g = 0; g < 41; ++g) want += op1.weights[g] * phi.row(g).squaredNorm();
  const double rank_err = std::max({std::abs(e1s.eigenvalues(0) - want), e1s.eigenvalues(1), e1s.eigenvalues(2)});

  // trace identity on the true sphere and spd-ai surfaces
  double trace_err = 0;
  for (Design d : {Design::sphere, Design::spd_ai}) {
    const CovSurface t = truth_surface(SimTruth(d, 0.02, 5.0), linspace(0, 1, 51));
    const DiscreteOperator op = discretize_operator(t);
    const EigenSystem e = eigenpairs(op, 1);
    double tr = 0;
    for (std::size_t g = 0; g < t.size(); ++g) tr += op.weights[g] * t.coef(g, g).trace();
    trace_err = std::max(trace_err, std::abs(e.total_variance - tr));
  }
  v.detail << "Brownian top eigenvalue rel. err " << fmt(top_err) << ", rank-one " << fmt(rank_err) << ", trace "
           << fmt(trace_err);
  v.require(top_err <= 0.02, "Brownian spectrum");
  v.require(rank_err <= 1e-8, "rank one");
  v.require(trace_err <= 1e-8, "trace");
}

// 8. byte-identical reports across reruns and thread counts
void determinism_suite(Verdict& v) {
  bool same = true;
  std::size_t bytes = 0;
  for (Design d : {Design::sphere, Design::spd_ai}) {
    ExperimentConfig c = table_config(d, 60, 5, 6);
    c.seed = 801;
    const std::string a = report_csv(run_experiment(c));
    const std::string b = report_csv(run_experiment(c));
    c.threads = 4;
    c.pipeline.threads = 2;
    const std::string t = report_csv(run_experiment(c));
    same = same && a == b && a == t;
    bytes += a.size();
  }
  v.detail << bytes << " CSV bytes compared across reruns and 1/4 threads";
  v.require(same, "byte identity");
}

}  // namespace

// Optional arguments restrict the run to the listed criterion numbers.
int main(int argc, char** argv) {
  std::vector<std::size_t> only;
  for (int a = 1; a < argc; ++a) only.push_back(static_cast<std::size_t>(std::atoi(argv[a])));
  const std::vector<std::pair<const char*, void (*)(Verdict&)>> suites = {
      {"geometry suite", geometry_suite},       {"bundle suite", bundle_suite},
      {"Euclidean oracle equivalence", oracle_suite}, {"frame invariance", frame_suite},
      {"desk-scale table reproduction", table_suite}, {"rate trends", rate_suite},
      {"spectrum oracle", spectrum_suite},       {"end-to-end determinism", determinism_suite},
  };
  int failed = 0;
  for (std::size_t k = 0; k < suites.size(); ++k) {
    if (!only.empty() && std::find(only.begin(), only.end(), k + 1) == only.end()) continue;
    Verdict v;
    try {
      suites[k].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, suites[k].first, v.detail.str().c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
