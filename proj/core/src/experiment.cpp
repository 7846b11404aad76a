#include "rfda/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rfda/error.hpp"
#include "rfda/parallel.hpp"
#include "rfda/rng.hpp"
#include "rfda/stats.hpp"

namespace rfda {

PipelineFit fit_pipeline(const SparseDataset& data, const PipelineOptions& o) {
  if (o.grid_points < 2) throw ValidationError("grid needs at least two points");
  const std::vector<double> grid = linspace(data.domain_lo, data.domain_hi, o.grid_points);
  CvOptions cv;
  cv.folds = o.folds;
  cv.seed = o.cv_seed;
  cv.grid_points = o.cv_grid_points;
  cv.kernel = o.kernel;
  cv.threads = o.threads;

  PipelineFit fit;
  MeanOptions mo;
  mo.kernel = o.kernel;
  double h_mu = 0.0;
  if (o.h_mu) {
    h_mu = *o.h_mu;
  } else if (o.policy == BandwidthPolicy::fixed) {
    throw ValidationError("the fixed bandwidth policy needs --h-mu and --h-cov");
  } else {
    const BandwidthGrid candidates = default_bandwidth_grid(data, o.candidates);
    fit.mean_selection = o.policy == BandwidthPolicy::cv ? cv_mean(data, candidates, cv)
                                                         : gcv_mean(data, candidates, cv);
    h_mu = fit.mean_selection->selected;
  }
  fit.mean = fit_mean(data, h_mu, grid, mo);

  double h_cov = 0.0;
  if (o.h_cov) {
    h_cov = *o.h_cov;
  } else if (o.policy == BandwidthPolicy::fixed) {
    throw ValidationError("the fixed bandwidth policy needs --h-mu and --h-cov");
  } else {
    const BandwidthGrid candidates = default_bandwidth_grid(data, o.candidates);
    fit.cov_selection = o.policy == BandwidthPolicy::cv ? cv_cov(data, fit.mean, candidates, cv)
                                                        : gcv_cov(data, fit.mean, candidates, cv);
    h_cov = fit.cov_selection->selected;
  }
  fit.surface = fit_cov_surface(data, fit.mean, h_cov, {o.kernel, 0.1});
  return fit;
}

Analysis analyze(const SparseDataset& data, const PipelineOptions& options, int k,
                 const BlupOptions& blup) {
  if (k < 1) throw ValidationError("the number of components must be at least 1");
  Analysis a;
  a.fit = fit_pipeline(data, options);
  a.noise = noise_variance(data, a.fit.mean, a.fit.surface);
  a.eigen = eigenpairs(discretize_operator(a.fit.surface), k);
  a.scores = blup_scores(data, a.fit.mean, a.fit.surface, a.eigen, a.noise, k, blup);
  return a;
}

RepResult run_rep(const ExperimentConfig& config, int rep) {
  RepResult r;
  r.rep = rep;
  const auto start = std::chrono::steady_clock::now();
  try {
    SimulationOptions so;
    so.independent_noise = config.independent_noise;
    so.weights = config.weights;
    const Simulation sim = simulate(config.design, config.n, config.m, config.snr,
                                    derive_seed(config.seed, static_cast<std::uint64_t>(rep)), so);
    PipelineOptions po = config.pipeline;
    po.threads = 1;
    const PipelineFit fit = fit_pipeline(sim.data, po);
    const SurfaceError err = surface_error(fit.surface, sim.truth);
    r.rmuie = err.rmuie;
    r.rrmise = err.rrmise;
    r.h_mu = fit.mean.bandwidth;
    r.h_cov = fit.surface.bandwidth;
    r.ok = true;
  } catch (const Error& e) {
    r.error = e.what();
  }
  if (config.timing)
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void summarize(ExperimentReport& report) {
  std::vector<double> a, b;
  report.failures = 0;
  for (const RepResult& r : report.reps) {
    if (!r.ok) {
      ++report.failures;
      continue;
    }
    a.push_back(100.0 * r.rmuie);
    b.push_back(100.0 * r.rrmise);
  }
  report.rmuie_mean = mean_of(a);
  report.rmuie_sd = sample_sd(a);
  report.rrmise_mean = mean_of(b);
  report.rrmise_sd = sample_sd(b);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.reps < 1) throw ValidationError("reps must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = config;
  report.reps.resize(static_cast<std::size_t>(config.reps));
  parallel_for(report.reps.size(), config.threads,
               [&](std::size_t k) { report.reps[k] = run_rep(config, static_cast<int>(k)); });
  summarize(report);
  if (config.timing)
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report.failures > 0.05 * config.reps) {
    std::ostringstream os;
    os << "experiment failed: " << report.failures << " of " << config.reps << " reps failed";
    for (const RepResult& r : report.reps)
      if (!r.ok) {
        os << "; first failure (rep " << r.rep << "): " << r.error;
        break;
      }
    throw NumericalError(os.str());
  }
  return report;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string report_csv(const ExperimentReport& report, bool header) {
  std::ostringstream os;
  if (header) os << "design,n,m,rep,rmuie,rrmise,h_mu,h_cov,seconds\n";
  const ExperimentConfig& c = report.config;
  for (const RepResult& r : report.reps) {
    os << to_string(c.design) << ',' << c.n << ',' << format_number(c.m) << ',' << r.rep << ',';
    if (r.ok) {
      os << format_number(100.0 * r.rmuie) << ',' << format_number(100.0 * r.rrmise) << ','
         << format_number(r.h_mu) << ',' << format_number(r.h_cov);
    } else {
      os << "nan,nan,nan,nan";
    }
    os << ',' << format_number(r.seconds) << '\n';
  }
  return os.str();
}

}  // namespace rfda
