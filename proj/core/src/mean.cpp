#include "rfda/mean.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfda/bundle.hpp"
#include "rfda/error.hpp"

namespace rfda {

namespace {

[[noreturn]] void rethrow_at(const Error& e, double t) {
  std::ostringstream os;
  os << e.what() << " (at t=" << t << ")";
  if (dynamic_cast<const ValidationError*>(&e)) throw ValidationError(os.str());
  if (dynamic_cast<const GuardError*>(&e)) throw GuardError(os.str());
  throw NumericalError(os.str());
}

struct LogState {
  Mat gradient;
  double objective = 0.0;
  double noise = 0.0;
};

LogState evaluate_at(const Geometry& geom, const Mat& stacked, const Vec& w, const Point& y) {
  geom.validate_point(y);
  LogState s;
  Mat logs;
  Vec sq;
  geom.log_batch(y.coords, stacked, logs, sq);
  s.objective = w.dot(sq);
  s.noise = 1e-14 * w.cwiseAbs().dot(sq);
  s.gradient = linalg::unvec(logs * w, geom.rows(), geom.cols());
  return s;
}

}  // namespace

LocalWeights local_weights(const SparseDataset& data, double t, double h, KernelType kernel) {
  const std::vector<double> lambda = data.mean_weights();
  return local_weights(data, lambda, t, h, kernel);
}

LocalWeights local_weights(const SparseDataset& data, std::span<const double> lambda, double t,
                           double h, KernelType kernel) {
  if (!(h > 0)) throw ValidationError("bandwidth must be positive");
  if (lambda.size() != data.subjects.size())
    throw ValidationError("local_weights: one λ per subject is required");
  const Kernel k{kernel};
  LocalWeights lw;
  lw.t = t;
  lw.h = h;
  std::vector<double> kv;
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -tmin;
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    const Subject& s = data.subjects[i];
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double d = s.times[j] - t;
      if (std::abs(d) >= h) continue;
      const double kh = k.scaled(d, h);
      lw.entries.push_back({i, j, 0.0, 0.0});
      kv.push_back(kh);
      tmin = std::min(tmin, s.times[j]);
      tmax = std::max(tmax, s.times[j]);
      lw.u0 += lambda[i] * kh;
      lw.u1 += lambda[i] * kh * d;
      lw.u2 += lambda[i] * kh * d * d;
    }
  }
  if (!(tmax > tmin)) {
    std::ostringstream os;
    os << "local_weights: fewer than two distinct observation times within bandwidth " << h
       << " of t=" << t;
    throw NumericalError(os.str());
  }
  lw.sigma0_sq = lw.u0 * lw.u2 - lw.u1 * lw.u1;
  if (!(lw.sigma0_sq > 1e-14)) {
    std::ostringstream os;
    os << "local_weights: degenerate local design at t=" << t << " (sigma0^2 = " << lw.sigma0_sq
       << ")";
    throw NumericalError(os.str());
  }
  for (std::size_t e = 0; e < lw.entries.size(); ++e) {
    WindowEntry& w = lw.entries[e];
    const double d = data.subjects[w.subject].times[w.obs] - t;
    w.weight = kv[e] * (lw.u2 - lw.u1 * d) / lw.sigma0_sq;
    w.effective = lambda[w.subject] * w.weight;
  }
  return lw;
}

FrechetResult frechet_minimize(const Geometry& geom, std::span<const Point> points,
                               std::span<const double> weights, const Point& init,
                               const FrechetOptions& options) {
  if (points.size() != weights.size())
    throw ValidationError("frechet_minimize: points and weights differ in length");
  double sum_abs = 0.0;
  for (double w : weights) sum_abs += std::abs(w);
  if (!(sum_abs > 0)) throw ValidationError("frechet_minimize: all weights are zero");
  geom.validate_point(init);
  for (const Point& p : points) geom.validate_point(p);

  Mat stacked(geom.ambient_size(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) stacked.col(static_cast<Eigen::Index>(i)) = linalg::vec(points[i].coords);
  const Vec w = Eigen::Map<const Vec>(weights.data(), static_cast<Eigen::Index>(weights.size()));

  FrechetResult r;
  r.point = init;
  LogState state = evaluate_at(geom, stacked, w, r.point);
  auto grad_norm = [&](const LogState& s, const Point& y) {
    return std::sqrt(std::max(0.0, geom.inner(y, {y, s.gradient}, {y, s.gradient})));
  };
  double gn = grad_norm(state, r.point);

  for (; r.iterations < options.max_iter; ++r.iterations) {
    if (gn <= options.tol * sum_abs) break;
    bool accepted = false;
    for (double tau = 1.0; tau >= options.min_step; tau *= 0.5) {
      Point cand;
      LogState next;
      try {
        cand = geom.exp(r.point, {r.point, (tau / sum_abs) * state.gradient});
        next = evaluate_at(geom, stacked, w, cand);
      } catch (const GuardError&) {
        continue;
      }
      const double next_gn = grad_norm(next, cand);
      // Near the optimum the objective stalls at rounding level; accept a step
      // there only when it still reduces the gradient.
      if (next.objective < state.objective ||
          (next.objective <= state.objective + state.noise && next_gn < gn)) {
        r.point = std::move(cand);
        state = std::move(next);
        gn = next_gn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  r.gradient_norm = gn;
  r.objective = state.objective;
  r.converged = gn <= options.tol * sum_abs;
  return r;
}

std::vector<Frame> transported_frames(const Geometry& geom, const std::vector<Point>& points) {
  std::vector<Frame> frames;
  frames.reserve(points.size());
  for (std::size_t g = 0; g < points.size(); ++g)
    frames.push_back(g == 0 ? geom.onb(points[0]) : geom.transport_frame(frames[g - 1], points[g]));
  return frames;
}

MeanCurve fit_mean(const SparseDataset& data, double h, std::span<const double> grid,
                   const MeanOptions& options, const MeanCurve* init) {
  if (!data.geometry) throw ValidationError("fit_mean: dataset has no geometry");
  if (grid.empty()) throw ValidationError("fit_mean: empty grid");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g] < data.domain_lo || grid[g] > data.domain_hi)
      throw ValidationError("fit_mean: grid point outside the domain");
    if (g > 0 && !(grid[g] > grid[g - 1]))
      throw ValidationError("fit_mean: grid must be strictly increasing");
  }
  if (init && init->size() != grid.size()) throw ValidationError("fit_mean: init curve grid mismatch");

  const Geometry& geom = *data.geometry;
  const std::vector<double> lambda = data.mean_weights();
  const Kernel kernel{options.kernel};

  MeanCurve curve;
  curve.geometry = data.geometry;
  curve.grid.assign(grid.begin(), grid.end());
  curve.bandwidth = h;
  curve.kernel = options.kernel;

  std::vector<Point> pts;
  std::vector<double> w;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double t = grid[g];
    try {
      const LocalWeights lw = local_weights(data, lambda, t, h, options.kernel);
      pts.clear();
      w.clear();
      for (const WindowEntry& e : lw.entries) {
        pts.push_back(data.subjects[e.subject].points[e.obs]);
        w.push_back(e.effective);
      }
      Point start;
      if (init) {
        start = init->points[g];
      } else if (g > 0) {
        start = curve.points[g - 1];
      } else {
        std::vector<double> kw(lw.entries.size());
        std::size_t best = 0;
        for (std::size_t e = 0; e < lw.entries.size(); ++e) {
          const WindowEntry& we = lw.entries[e];
          kw[e] = lambda[we.subject] * kernel.scaled(data.subjects[we.subject].times[we.obs] - t, h);
          if (kw[e] > kw[best]) best = e;
        }
        start = frechet_minimize(geom, pts, kw, pts[best], options.frechet).point;
      }
      FrechetResult r = frechet_minimize(geom, pts, w, start, options.frechet);
      if (!r.converged && !options.allow_unconverged) {
        std::ostringstream os;
        os << "Frechet minimization did not converge after " << r.iterations
           << " iterations (gradient norm " << r.gradient_norm << ")";
        throw NumericalError(os.str());
      }
      curve.points.push_back(std::move(r.point));
      curve.diagnostics.push_back({r.gradient_norm, r.iterations, r.converged});
    } catch (const Error& e) {
      rethrow_at(e, t);
    }
  }
  curve.frames = transported_frames(geom, curve.points);
  return curve;
}

MeanCurve MeanCurve::reframed(const std::vector<Mat>& rotations) const {
  if (rotations.size() != frames.size()) throw ValidationError("reframed: one rotation per grid point");
  MeanCurve out = *this;
  for (std::size_t g = 0; g < frames.size(); ++g) out.frames[g] = frames[g].rotated(rotations[g]);
  return out;
}

MeanEval locate_mean(const MeanCurve& curve, double t) {
  if (curve.size() == 0) throw ValidationError("eval_mean: empty curve");
  const Geometry& geom = *curve.geometry;
  MeanEval ev;
  ev.bracket = locate(curve.grid, t);
  const int g = ev.bracket.lower;
  const double a = ev.bracket.fraction;
  const int d = geom.dim();
  if (curve.size() == 1 || a == 0.0) {
    ev.point = curve.points[g];
    ev.frame = curve.frames[g];
    ev.from_lower = Mat::Identity(d, d);
    ev.from_upper = curve.size() == 1 ? Mat::Identity(d, d)
                                      : frame_transfer(geom, curve.frames[g + 1], ev.frame);
    return ev;
  }
  if (a == 1.0) {
    ev.bracket = {g, 1.0};
    ev.point = curve.points[g + 1];
    ev.frame = curve.frames[g + 1];
    ev.from_lower = frame_transfer(geom, curve.frames[g], ev.frame);
    ev.from_upper = Mat::Identity(d, d);
    return ev;
  }
  const Point& p = curve.points[g];
  const Tangent v = geom.log(p, curve.points[g + 1]);
  ev.point = geom.exp(p, {p, a * v.components});
  ev.frame = geom.transport_frame(curve.frames[g], ev.point);
  ev.from_lower = frame_transfer(geom, curve.frames[g], ev.frame);
  ev.from_upper = frame_transfer(geom, curve.frames[g + 1], ev.frame);
  return ev;
}

PointFrame eval_mean(const MeanCurve& curve, double t) {
  MeanEval ev = locate_mean(curve, t);
  return {std::move(ev.point), std::move(ev.frame)};
}

}  // namespace rfda
