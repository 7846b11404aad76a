#include "rfda/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfda/error.hpp"

namespace rfda {

namespace {

constexpr double kDenominatorGuard = 1e-12;

struct Coefs {
  double c00, c10, c01;
};

// β₀ = (c00 R00 + c10 R10 + c01 R01) / den
Coefs intercept_coefficients(double s10, double s01, double s20, double s11,
                             double s02) {
  return {s20 * s02 - s11 * s11, -(s10 * s02 - s01 * s11), s10 * s11 - s01 * s20};
}

std::string cell_message(const char* what, double s, double t, std::size_t pairs) {
  std::ostringstream os;
  os << what << " at (s,t)=(" << s << "," << t << ") with " << pairs << " pairs";
  return os.str();
}

void check_bandwidth(double h) {
  if (!(h > 0) || !std::isfinite(h)) throw ValidationError("covariance bandwidth must be positive");
}

}  // namespace

double moment_denominator(double s00, double s10, double s01, double s20, double s11, double s02) {
  const Coefs c = intercept_coefficients(s10, s01, s20, s11, s02);
  return c.c00 * s00 + c.c10 * s10 + c.c01 * s01;
}

// ---------------------------------------------------------------- direct route

std::vector<std::vector<ObservationTangent>> observation_tangents(const SparseDataset& data,
                                                                  const MeanCurve& mean) {
  const Geometry& geom = *mean.geometry;
  std::vector<std::vector<ObservationTangent>> out(data.subjects.size());
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    const Subject& s = data.subjects[i];
    out[i].reserve(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      ObservationTangent ot;
      ot.time = s.times[j];
      ot.at = locate_mean(mean, s.times[j]);
      ot.z = ot.at.frame.coefficients_of(geom.log(ot.at.point, s.points[j]).components);
      out[i].push_back(std::move(ot));
    }
  }
  return out;
}

MomentSums moment_sums(const SparseDataset& data, const MeanCurve& mean, double s, double t,
                       double h, KernelType kernel) {
  check_bandwidth(h);
  const Geometry& geom = *mean.geometry;
  const Kernel k{kernel};
  const std::vector<double> nu = data.cov_weights();
  const PointFrame at_s = eval_mean(mean, s);
  const PointFrame at_t = eval_mean(mean, t);
  const int d = geom.dim();

  MomentSums m;
  m.s = s;
  m.t = t;
  m.h = h;
  Mat r00 = Mat::Zero(d, d), r10 = Mat::Zero(d, d), r01 = Mat::Zero(d, d);
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    if (nu[i] == 0.0) continue;
    const Subject& sub = data.subjects[i];
    for (std::size_t j = 0; j < sub.size(); ++j) {
      if (std::abs(sub.times[j] - s) >= h) continue;
      const PointFrame fj = eval_mean(mean, sub.times[j]);
      for (std::size_t l = 0; l < sub.size(); ++l) {
        if (l == j || std::abs(sub.times[l] - t) >= h) continue;
        const PointFrame fl = eval_mean(mean, sub.times[l]);
        const double w = nu[i] * k.scaled(s - sub.times[j], h) * k.scaled(t - sub.times[l], h);
        if (w == 0.0) continue;
        const double x = (sub.times[j] - s) / h;
        const double y = (sub.times[l] - t) / h;
        const FiberElement raw = raw_cov(geom, fj.frame, fl.frame, sub.points[j], sub.points[l]);
        const Mat a = bundle_transport(geom, raw, at_s.frame, at_t.frame).coefficients();
        m.s00 += w;
        m.s10 += w * x;
        m.s01 += w * y;
        m.s20 += w * x * x;
        m.s11 += w * x * y;
        m.s02 += w * y * y;
        r00 += w * a;
        r10 += w * x * a;
        r01 += w * y * a;
        ++m.pairs;
      }
    }
  }
  if (m.pairs < 3) throw NumericalError(cell_message("insufficient pairs in the smoothing window", s, t, m.pairs));
  m.r00 = FiberElement(at_s.frame, at_t.frame, r00);
  m.r10 = FiberElement(at_s.frame, at_t.frame, r10);
  m.r01 = FiberElement(at_s.frame, at_t.frame, r01);
  return m;
}

FiberElement fit_cov_point(const MomentSums& m) {
  if (m.pairs < 3) throw NumericalError(cell_message("insufficient pairs in the smoothing window", m.s, m.t, m.pairs));
  const Coefs c = intercept_coefficients(m.s10, m.s01, m.s20, m.s11, m.s02);
  const double den = c.c00 * m.s00 + c.c10 * m.s10 + c.c01 * m.s01;
  if (!(std::abs(den) > kDenominatorGuard * m.s00 * m.s00 * m.s00))
    throw NumericalError(cell_message("near-singular local design", m.s, m.t, m.pairs));
  const Mat beta = (c.c00 * m.r00.coefficients() + c.c10 * m.r10.coefficients() +
                    c.c01 * m.r01.coefficients()) /
                   den;
  return {m.r00.source_frame(), m.r00.target_frame(), beta};
}

// ---------------------------------------------------------------- grid sums

GridTangents grid_tangents(const SparseDataset& data, const MeanCurve& mean, double reach) {
  const Geometry& geom = *mean.geometry;
  GridTangents gt;
  gt.reach = reach;
  gt.entries.resize(data.subjects.size());
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    const Subject& sub = data.subjects[i];
    gt.entries[i].resize(sub.size());
    for (std::size_t j = 0; j < sub.size(); ++j) {
      const double tj = sub.times[j];
      auto lo = std::upper_bound(mean.grid.begin(), mean.grid.end(), tj - reach);
      if (lo == mean.grid.end() || *lo >= tj + reach) continue;
      const MeanEval at = locate_mean(mean, tj);
      const Tangent z = geom.log(at.point, sub.points[j]);
      for (auto it = lo; it != mean.grid.end() && *it < tj + reach; ++it) {
        const std::size_t g = static_cast<std::size_t>(it - mean.grid.begin());
        const Tangent moved = geom.transport(at.point, mean.points[g], z);
        gt.entries[i][j].push_back({g, mean.frames[g].coefficients_of(moved.components)});
      }
    }
  }
  return gt;
}

MomentGrid::MomentGrid(const SparseDataset& data, const MeanCurve& mean, double h,
                       KernelType kernel, const std::vector<int>& group_of_subject, int groups,
                       const GridTangents* cache)
    : size_(mean.size()), d_(mean.geometry->dim()), groups_(groups) {
  check_bandwidth(h);
  if (groups < 1) throw ValidationError("MomentGrid: at least one group is required");
  if (group_of_subject.size() != data.subjects.size())
    throw ValidationError("MomentGrid: one group label per subject is required");
  GridTangents own;
  if (!cache || cache->reach < h) {
    own = grid_tangents(data, mean, h);
    cache = &own;
  }
  const Kernel k{kernel};
  const std::vector<double> nu = data.cov_weights();
  const std::size_t G = size_;
  const Eigen::Index dd = d_;
  sums_.assign(static_cast<std::size_t>(groups) * G * G * stride(), 0.0);

  // Per subject the sums over ordered pairs j≠k factor as (Σ_j f_j(g)) ⊗ (Σ_k f_k(h))
  // minus the j=k terms, so each subject costs O(cells) rather than O(pairs × cells).
  Mat v0(dd, static_cast<Eigen::Index>(G)), v1(dd, static_cast<Eigen::Index>(G));
  std::vector<double> p0(G), p1(G), p2(G), cnt(G);
  struct Near {
    std::size_t g;
    double kv;
    double x;
    const Vec* a;
  };
  std::vector<std::vector<Near>> near;
  std::vector<std::size_t> active;
  Mat outer(dd, dd);
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    if (nu[i] == 0.0) continue;
    const int grp = group_of_subject[i];
    if (grp < 0 || grp >= groups) throw ValidationError("MomentGrid: group label out of range");
    const Subject& sub = data.subjects[i];
    const double w = nu[i];
    near.assign(sub.size(), {});
    std::fill(p0.begin(), p0.end(), 0.0);
    std::fill(p1.begin(), p1.end(), 0.0);
    std::fill(p2.begin(), p2.end(), 0.0);
    std::fill(cnt.begin(), cnt.end(), 0.0);
    v0.setZero();
    v1.setZero();
    for (std::size_t j = 0; j < sub.size(); ++j) {
      const double tj = sub.times[j];
      for (const GridTangents::Entry& en : cache->entries[i][j]) {
        const std::size_t g = en.g;
        const double diff = tj - mean.grid[g];
        if (std::abs(diff) >= h) continue;
        const double kv = k.scaled(diff, h);
        if (kv == 0.0) continue;
        const double x = diff / h;
        p0[g] += kv;
        p1[g] += kv * x;
        p2[g] += kv * x * x;
        cnt[g] += 1.0;
        v0.col(static_cast<Eigen::Index>(g)) += kv * en.a;
        v1.col(static_cast<Eigen::Index>(g)) += (kv * x) * en.a;
        near[j].push_back({g, kv, x, &en.a});
      }
    }
    active.clear();
    for (std::size_t g = 0; g < G; ++g)
      if (cnt[g] > 0) active.push_back(g);
    for (std::size_t ia = 0; ia < active.size(); ++ia) {
      const std::size_t g = active[ia];
      const auto eg = static_cast<Eigen::Index>(g);
      for (std::size_t ib = ia; ib < active.size(); ++ib) {
        const std::size_t hh = active[ib];
        const auto eh = static_cast<Eigen::Index>(hh);
        double* c = &sums_[offset(grp, g, hh)];
        c[0] += w * p0[g] * p0[hh];
        c[1] += w * p1[g] * p0[hh];
        c[2] += w * p0[g] * p1[hh];
        c[3] += w * p2[g] * p0[hh];
        c[4] += w * p1[g] * p1[hh];
        c[5] += w * p0[g] * p2[hh];
        c[6] += cnt[g] * cnt[hh];
        Eigen::Map<Mat> r00(c + 7, dd, dd), r10(c + 7 + dd * dd, dd, dd), r01(c + 7 + 2 * dd * dd, dd, dd);
        r00.noalias() += w * v0.col(eh) * v0.col(eg).transpose();
        r10.noalias() += w * v0.col(eh) * v1.col(eg).transpose();
        r01.noalias() += w * v1.col(eh) * v0.col(eg).transpose();
      }
    }
    // remove the j = k terms
    for (std::size_t j = 0; j < sub.size(); ++j) {
      for (const Near& nj : near[j]) {
        for (const Near& nl : near[j]) {
          if (nj.g > nl.g) continue;
          const double wk = w * nj.kv * nl.kv;
          double* c = &sums_[offset(grp, nj.g, nl.g)];
          c[0] -= wk;
          c[1] -= wk * nj.x;
          c[2] -= wk * nl.x;
          c[3] -= wk * nj.x * nj.x;
          c[4] -= wk * nj.x * nl.x;
          c[5] -= wk * nl.x * nl.x;
          c[6] -= 1.0;
          outer.noalias() = (*nl.a) * nj.a->transpose();
          Eigen::Map<Mat> r00(c + 7, dd, dd), r10(c + 7 + dd * dd, dd, dd), r01(c + 7 + 2 * dd * dd, dd, dd);
          r00.noalias() -= wk * outer;
          r10.noalias() -= (wk * nj.x) * outer;
          r01.noalias() -= (wk * nl.x) * outer;
        }
      }
    }
  }
}

CovSurface MomentGrid::solve(const MeanCurve& mean, double h, KernelType kernel, int excluded,
                             double max_failed_fraction) const {
  if (mean.size() != size_) throw ValidationError("MomentGrid::solve: mean grid mismatch");
  const Geometry& geom = *mean.geometry;
  const std::size_t G = size_;
  const int d = d_;
  CovSurface surf;
  surf.mean = mean;
  surf.bandwidth = h;
  surf.kernel = kernel;
  surf.cells.assign(G * G, Mat::Zero(d, d));
  surf.diagnostics.assign(G * G, {});
  if (h > mean.bandwidth) {
    std::ostringstream os;
    os << "covariance bandwidth " << h << " exceeds the mean bandwidth " << mean.bandwidth;
    surf.warnings.push_back(os.str());
  }

  std::vector<double> acc(stride());
  std::size_t failed = 0;
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t hh = g; hh < G; ++hh) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int grp = 0; grp < groups_; ++grp) {
        if (grp == excluded) continue;
        const double* c = &sums_[offset(grp, g, hh)];
        for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += c[e];
      }
      CellDiagnostics diag;
      diag.pairs = static_cast<std::size_t>(acc[6]);
      const Coefs cf = intercept_coefficients(acc[1], acc[2], acc[3], acc[4], acc[5]);
      diag.denominator = cf.c00 * acc[0] + cf.c10 * acc[1] + cf.c01 * acc[2];
      const double s = mean.grid[g], t = mean.grid[hh];
      if (diag.pairs < 3) {
        diag.error = cell_message("insufficient pairs in the smoothing window", s, t, diag.pairs);
      } else if (!(std::abs(diag.denominator) > kDenominatorGuard * acc[0] * acc[0] * acc[0])) {
        diag.error = cell_message("near-singular local design", s, t, diag.pairs);
      } else {
        diag.ok = true;
        diag.center_weight = cf.c00 / diag.denominator;
        const Eigen::Map<const Mat> r00(acc.data() + 7, d, d);
        const Eigen::Map<const Mat> r10(acc.data() + 7 + d * d, d, d);
        const Eigen::Map<const Mat> r01(acc.data() + 7 + 2 * d * d, d, d);
        Mat beta = (cf.c00 * r00 + cf.c10 * r10 + cf.c01 * r01) / diag.denominator;
        if (g == hh) beta = 0.5 * (beta + beta.transpose()).eval();
        surf.coef(hh, g) = beta.transpose();
        surf.coef(g, hh) = std::move(beta);
      }
      if (!diag.ok) failed += (g == hh) ? 1 : 2;
      surf.diagnostics[hh * G + g] = diag;
      surf.diagnostics[g * G + hh] = std::move(diag);
    }
  }
  surf.failed_cells = failed;
  if (failed > 0) {
    if (static_cast<double>(failed) > max_failed_fraction * static_cast<double>(G * G)) {
      std::ostringstream os;
      os << "covariance fit failed on " << failed << " of " << G * G << " grid cells; first: ";
      for (const CellDiagnostics& c : surf.diagnostics)
        if (!c.ok) {
          os << c.error;
          break;
        }
      throw NumericalError(os.str());
    }
    // Fill each failed cell from the nearest solved cell, moved into its fiber.
    std::vector<Mat> transfer(G * G);
    auto move = [&](std::size_t from, std::size_t to) -> const Mat& {
      Mat& m = transfer[from * G + to];
      if (m.size() == 0) m = frame_transfer(geom, mean.frames[from], mean.frames[to]);
      return m;
    };
    for (std::size_t g = 0; g < G; ++g) {
      for (std::size_t hh = g; hh < G; ++hh) {
        if (surf.diagnostics[g * G + hh].ok) continue;
        std::size_t best = G * G;
        std::size_t best_dist = std::numeric_limits<std::size_t>::max();
        for (std::size_t c = 0; c < G * G; ++c) {
          if (!surf.diagnostics[c].ok) continue;
          const std::size_t cg = c / G, ch = c % G;
          const std::size_t dist = std::max(cg > g ? cg - g : g - cg, ch > hh ? ch - hh : hh - ch);
          if (dist < best_dist) {
            best_dist = dist;
            best = c;
          }
        }
        if (best == G * G) throw NumericalError("covariance fit failed on every grid cell");
        const std::size_t bg = best / G, bh = best % G;
        Mat a = move(bh, hh) * surf.coef(bg, bh) * move(bg, g).transpose();
        if (g == hh) a = 0.5 * (a + a.transpose()).eval();
        surf.coef(hh, g) = a.transpose();
        surf.coef(g, hh) = std::move(a);
      }
    }
  }
  return surf;
}

CovSurface fit_cov_surface(const SparseDataset& data, const MeanCurve& mean, double h,
                           const CovOptions& options) {
  if (!mean.geometry || !data.geometry || mean.geometry->descriptor() != data.geometry->descriptor())
    throw ValidationError("fit_cov_surface: mean and dataset use different geometries");
  const MomentGrid grid(data, mean, h, options.kernel, std::vector<int>(data.subjects.size(), 0), 1);
  return grid.solve(mean, h, options.kernel, -1, options.max_failed_fraction);
}

// ---------------------------------------------------------------- evaluation

FiberElement CovSurface::cell(std::size_t g, std::size_t h) const {
  return {mean.frames[g], mean.frames[h], coef(g, h)};
}

Mat CovSurface::coefficients_at(const MeanEval& s, const MeanEval& t) const {
  struct Corner {
    std::size_t index;
    double weight;
    const Mat* transfer;
  };
  auto corners = [](const MeanEval& e, Corner* out) {
    int n = 0;
    const double a = e.bracket.fraction;
    const std::size_t g = static_cast<std::size_t>(e.bracket.lower);
    if (a < 1.0) out[n++] = {g, 1.0 - a, &e.from_lower};
    if (a > 0.0) out[n++] = {g + 1, a, &e.from_upper};
    return n;
  };
  Corner cs[2], ct[2];
  const int ns = corners(s, cs);
  const int nt = corners(t, ct);
  const int d = dim();
  Mat out = Mat::Zero(d, d);
  Mat tmp(d, d);
  for (int a = 0; a < ns; ++a)
    for (int b = 0; b < nt; ++b) {
      tmp.noalias() = coef(cs[a].index, ct[b].index) * cs[a].transfer->transpose();
      out.noalias() += (cs[a].weight * ct[b].weight) * (*ct[b].transfer) * tmp;
    }
  return out;
}

FiberElement CovSurface::eval(double s, double t) const {
  const MeanEval es = locate_mean(mean, s);
  const MeanEval et = locate_mean(mean, t);
  return {es.frame, et.frame, coefficients_at(es, et)};
}

Mat CovSurface::gnorm_grid() const {
  const std::size_t G = size();
  Mat out(G, G);
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t h = 0; h < G; ++h) out(g, h) = coef(g, h).norm();
  return out;
}

NoiseVariance noise_variance(const SparseDataset& data, const MeanCurve& mean,
                             const CovSurface& surface) {
  const auto obs = observation_tangents(data, mean);
  const double n = static_cast<double>(data.subjects.size());
  const double d = static_cast<double>(mean.geometry->dim());
  std::vector<double> terms;
  terms.reserve(data.total_observations());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double mi = static_cast<double>(obs[i].size());
    for (const ObservationTangent& o : obs[i]) {
      const double tr = surface.coefficients_at(o.at, o.at).trace();
      terms.push_back((o.z.squaredNorm() - tr) / (n * d * mi));
    }
  }
  NoiseVariance nv;
  nv.raw = pairwise_sum(terms);
  nv.sigma2 = std::max(nv.raw, kNoiseFloor);
  return nv;
}

}  // namespace rfda
