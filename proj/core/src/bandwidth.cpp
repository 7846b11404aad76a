#include "rfda/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfda/error.hpp"
#include "rfda/parallel.hpp"
#include "rfda/rng.hpp"
#include "rfda/stats.hpp"

namespace rfda {

namespace {

std::vector<double> domain_grid(const SparseDataset& data, int points) {
  if (points < 2) throw ValidationError("CV grid needs at least two points");
  return linspace(data.domain_lo, data.domain_hi, points);
}

/// The mean curve resampled on another grid, frames carried by transport.
MeanCurve resample(const MeanCurve& mean, const std::vector<double>& grid) {
  if (grid == mean.grid) return mean;
  MeanCurve out;
  out.geometry = mean.geometry;
  out.grid = grid;
  out.bandwidth = mean.bandwidth;
  out.kernel = mean.kernel;
  for (double t : grid) {
    PointFrame pf = eval_mean(mean, t);
    out.points.push_back(std::move(pf.point));
    out.frames.push_back(std::move(pf.frame));
    out.diagnostics.push_back({0.0, 0, true});
  }
  return out;
}

void check_options(const CvOptions& o) {
  if (o.folds < 2) throw ValidationError("cross-validation needs at least two folds");
}

}  // namespace

BandwidthSelection select_bandwidth(std::vector<RiskRow> table, std::string_view what) {
  BandwidthSelection sel;
  sel.table = std::move(table);
  double best = std::numeric_limits<double>::infinity();
  for (const RiskRow& r : sel.table)
    if (r.ok) best = std::min(best, r.risk);
  if (!std::isfinite(best)) {
    std::ostringstream os;
    os << what << ": every candidate bandwidth failed";
    for (const RiskRow& r : sel.table) os << "\n  h=" << r.h << ": " << r.error;
    throw NumericalError(os.str());
  }
  // Ties (up to rounding) go to the larger bandwidth.
  for (const RiskRow& r : sel.table)
    if (r.ok && r.risk <= best * (1.0 + 1e-12) + 1e-300) sel.selected = r.h;
  return sel;
}

BandwidthGrid make_bandwidth_grid(std::vector<double> values) {
  if (values.empty()) throw ValidationError("bandwidth grid is empty");
  for (double v : values)
    if (!(v > 0) || !std::isfinite(v)) throw ValidationError("bandwidths must be positive");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return {values};
}

BandwidthGrid default_bandwidth_grid(const SparseDataset& data, int count) {
  if (count < 1) throw ValidationError("bandwidth grid needs at least one value");
  std::vector<double> gaps;
  for (const Subject& s : data.subjects)
    for (std::size_t j = 1; j < s.size(); ++j) gaps.push_back(s.times[j] - s.times[j - 1]);
  const double span = data.domain_hi - data.domain_lo;
  const double hi = 0.5 * span;
  double lo = gaps.empty() ? 0.05 * span : 1.5 * median_of(gaps);
  lo = std::clamp(lo, 1e-3 * span, hi);
  std::vector<double> v(count);
  for (int k = 0; k < count; ++k)
    v[k] = count == 1 ? hi : lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
  v.back() = hi;
  return make_bandwidth_grid(std::move(v));
}

BandwidthPolicy parse_bandwidth_policy(std::string_view name) {
  if (name == "fixed") return BandwidthPolicy::fixed;
  if (name == "cv") return BandwidthPolicy::cv;
  if (name == "gcv") return BandwidthPolicy::gcv;
  throw ValidationError("unknown bandwidth policy '" + std::string(name) + "' (fixed|cv|gcv)");
}

std::string_view to_string(BandwidthPolicy policy) {
  switch (policy) {
    case BandwidthPolicy::fixed:
      return "fixed";
    case BandwidthPolicy::cv:
      return "cv";
    case BandwidthPolicy::gcv:
      return "gcv";
  }
  return "?";
}

std::vector<int> assign_folds(std::size_t subjects, int folds, std::uint64_t seed) {
  if (folds < 1) throw ValidationError("fold count must be positive");
  std::vector<std::size_t> order(subjects);
  for (std::size_t i = 0; i < subjects; ++i) order[i] = i;
  RandomStream rng(seed, 0xF01D5ULL);
  for (std::size_t i = subjects; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<int> label(subjects);
  for (std::size_t k = 0; k < subjects; ++k) label[order[k]] = static_cast<int>(k % folds);
  return label;
}

BandwidthSelection cv_mean(const SparseDataset& data, const BandwidthGrid& grid,
                           const CvOptions& options) {
  check_options(options);
  const std::vector<double> tgrid = domain_grid(data, options.grid_points);
  const std::vector<int> fold = assign_folds(data.subjects.size(), options.folds, options.seed);
  const std::size_t C = grid.values.size();
  const std::size_t F = static_cast<std::size_t>(options.folds);
  std::vector<std::vector<std::size_t>> train(F), held(F);
  for (std::size_t i = 0; i < data.subjects.size(); ++i)
    for (std::size_t f = 0; f < F; ++f) (fold[i] == static_cast<int>(f) ? held : train)[f].push_back(i);

  std::vector<double> risk(C * F, 0.0);
  std::vector<std::string> error(C * F);
  MeanOptions mo;
  mo.kernel = options.kernel;
  mo.allow_unconverged = true;
  parallel_for(C * F, options.threads, [&](std::size_t task) {
    const std::size_t c = task / F, f = task % F;
    try {
      const SparseDataset tr = data.subset(train[f]);
      const MeanCurve curve = fit_mean(tr, grid.values[c], tgrid, mo);
      const Geometry& geom = *data.geometry;
      std::vector<double> terms;
      for (std::size_t i : held[f]) {
        const Subject& s = data.subjects[i];
        for (std::size_t j = 0; j < s.size(); ++j) {
          const double d = geom.dist(eval_mean(curve, s.times[j]).point, s.points[j]);
          terms.push_back(d * d);
        }
      }
      risk[task] = pairwise_sum(terms);
    } catch (const Error& e) {
      error[task] = e.what();
    }
  });

  std::vector<RiskRow> table(C);
  for (std::size_t c = 0; c < C; ++c) {
    table[c].h = grid.values[c];
    table[c].ok = true;
    for (std::size_t f = 0; f < F; ++f) {
      if (!error[c * F + f].empty()) {
        table[c].ok = false;
        table[c].error = error[c * F + f];
        break;
      }
      table[c].risk += risk[c * F + f];
    }
    if (!table[c].ok) table[c].risk = std::numeric_limits<double>::infinity();
  }
  return select_bandwidth(std::move(table), "cv_mean");
}

BandwidthSelection cv_cov(const SparseDataset& data, const MeanCurve& mean,
                          const BandwidthGrid& grid, const CvOptions& options) {
  check_options(options);
  const MeanCurve coarse = resample(mean, domain_grid(data, options.grid_points));
  const std::vector<int> fold = assign_folds(data.subjects.size(), options.folds, options.seed);
  const auto obs = observation_tangents(data, coarse);
  const std::size_t C = grid.values.size();
  const int F = options.folds;

  const GridTangents cache = grid_tangents(data, coarse, grid.values.back());
  std::vector<RiskRow> table(C);
  parallel_for(C, options.threads, [&](std::size_t c) {
    RiskRow& row = table[c];
    row.h = grid.values[c];
    try {
      const MomentGrid sums(data, coarse, row.h, options.kernel, fold, F, &cache);
      std::vector<double> per_fold(F, 0.0);
      for (int f = 0; f < F; ++f) {
        const CovSurface surf = sums.solve(coarse, row.h, options.kernel, f);
        std::vector<double> terms;
        for (std::size_t i = 0; i < data.subjects.size(); ++i) {
          if (fold[i] != f || obs[i].size() < 2) continue;
          for (std::size_t j = 0; j < obs[i].size(); ++j)
            for (std::size_t k = 0; k < obs[i].size(); ++k) {
              if (j == k) continue;
              const Mat raw = obs[i][k].z * obs[i][j].z.transpose();
              terms.push_back((raw - surf.coefficients_at(obs[i][j].at, obs[i][k].at)).squaredNorm());
            }
        }
        per_fold[f] = pairwise_sum(terms);
      }
      row.risk = pairwise_sum(per_fold);
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
      row.risk = std::numeric_limits<double>::infinity();
    }
  });
  return select_bandwidth(std::move(table), "cv_cov");
}

BandwidthSelection gcv_mean(const SparseDataset& data, const BandwidthGrid& grid,
                            const CvOptions& options) {
  const std::vector<double> tgrid = domain_grid(data, options.grid_points);
  const std::vector<double> lambda = data.mean_weights();
  const Kernel kernel{options.kernel};
  const double n_obs = static_cast<double>(data.total_observations());
  const std::size_t C = grid.values.size();
  std::vector<RiskRow> table(C);
  MeanOptions mo;
  mo.kernel = options.kernel;
  mo.allow_unconverged = true;
  parallel_for(C, options.threads, [&](std::size_t c) {
    RiskRow& row = table[c];
    const double h = grid.values[c];
    row.h = h;
    try {
      const MeanCurve curve = fit_mean(data, h, tgrid, mo);
      // û_k on the grid, interpolated to the observation times.
      std::vector<double> u0(tgrid.size()), u1(tgrid.size()), u2(tgrid.size());
      for (std::size_t g = 0; g < tgrid.size(); ++g) {
        const LocalWeights lw = local_weights(data, lambda, tgrid[g], h, options.kernel);
        u0[g] = lw.u0;
        u1[g] = lw.u1;
        u2[g] = lw.u2;
      }
      std::vector<double> rss, trace;
      for (std::size_t i = 0; i < data.subjects.size(); ++i) {
        const Subject& s = data.subjects[i];
        for (std::size_t j = 0; j < s.size(); ++j) {
          const double d = data.geometry->dist(eval_mean(curve, s.times[j]).point, s.points[j]);
          rss.push_back(lambda[i] * d * d);
          const Bracket b = locate(tgrid, s.times[j]);
          auto lerp = [&](const std::vector<double>& u) {
            return b.fraction > 0 ? (1 - b.fraction) * u[b.lower] + b.fraction * u[b.lower + 1]
                                  : u[b.lower];
          };
          const double a0 = lerp(u0), a1 = lerp(u1), a2 = lerp(u2);
          const double s0 = a0 * a2 - a1 * a1;
          trace.push_back(s0 > 0 ? lambda[i] * kernel.scaled(0.0, h) * a2 / s0 : 0.0);
        }
      }
      const double tr = pairwise_sum(trace);
      const double denom = 1.0 - tr / n_obs;
      if (!(denom > 0)) throw NumericalError("gcv_mean: effective degrees of freedom exceed the sample");
      row.risk = pairwise_sum(rss) / (denom * denom);
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
      row.risk = std::numeric_limits<double>::infinity();
    }
  });
  return select_bandwidth(std::move(table), "gcv_mean");
}

BandwidthSelection gcv_cov(const SparseDataset& data, const MeanCurve& mean,
                           const BandwidthGrid& grid, const CvOptions& options) {
  const MeanCurve coarse = resample(mean, domain_grid(data, options.grid_points));
  const auto obs = observation_tangents(data, coarse);
  const std::vector<double> nu = data.cov_weights();
  const Kernel kernel{options.kernel};
  const std::size_t C = grid.values.size();
  const std::size_t G = coarse.size();
  std::vector<RiskRow> table(C);
  parallel_for(C, options.threads, [&](std::size_t c) {
    RiskRow& row = table[c];
    const double h = grid.values[c];
    row.h = h;
    try {
      const CovSurface surf = fit_cov_surface(data, coarse, h, {options.kernel, 0.1});
      const double k0 = kernel.scaled(0.0, h);
      std::vector<double> rss, trace;
      double pairs = 0.0;
      for (std::size_t i = 0; i < data.subjects.size(); ++i) {
        if (nu[i] == 0.0) continue;
        for (std::size_t j = 0; j < obs[i].size(); ++j)
          for (std::size_t k = 0; k < obs[i].size(); ++k) {
            if (j == k) continue;
            const Mat raw = obs[i][k].z * obs[i][j].z.transpose();
            rss.push_back(nu[i] * (raw - surf.coefficients_at(obs[i][j].at, obs[i][k].at)).squaredNorm());
            const auto near = [&](const MeanEval& e) {
              return static_cast<std::size_t>(e.bracket.lower) + (e.bracket.fraction >= 0.5 ? 1 : 0);
            };
            const CellDiagnostics& cd = surf.diagnostics[near(obs[i][j].at) * G + near(obs[i][k].at)];
            trace.push_back(cd.ok ? nu[i] * k0 * k0 * cd.center_weight : 0.0);
            pairs += 1.0;
          }
      }
      const double denom = 1.0 - pairwise_sum(trace) / pairs;
      if (!(denom > 0)) throw NumericalError("gcv_cov: effective degrees of freedom exceed the sample");
      row.risk = pairwise_sum(rss) / (denom * denom);
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
      row.risk = std::numeric_limits<double>::infinity();
    }
  });
  return select_bandwidth(std::move(table), "gcv_cov");
}

std::string risk_table_csv(const BandwidthSelection& sel) {
  std::ostringstream os;
  os.precision(17);
  os << "h,risk,ok\n";
  for (const RiskRow& r : sel.table) os << r.h << ',' << (r.ok ? r.risk : 0.0) << ',' << (r.ok ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace rfda
