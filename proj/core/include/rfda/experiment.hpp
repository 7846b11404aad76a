#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfda/bandwidth.hpp"
#include "rfda/fpca.hpp"
#include "rfda/metrics.hpp"

namespace rfda {

/// Settings of one mean + covariance fit.
struct PipelineOptions {
  int grid_points = 51;
  KernelType kernel = KernelType::epanechnikov;
  BandwidthPolicy policy = BandwidthPolicy::cv;
  /// Used by the fixed policy (and as overrides when set under cv/gcv).
  std::optional<double> h_mu;
  std::optional<double> h_cov;
  /// Candidate count of the default bandwidth grid.
  int candidates = 8;
  int folds = 5;
  std::uint64_t cv_seed = 0;
  int cv_grid_points = 21;
  int threads = 1;
};

struct PipelineFit {
  MeanCurve mean;
  CovSurface surface;
  std::optional<BandwidthSelection> mean_selection;
  std::optional<BandwidthSelection> cov_selection;
};

/// Bandwidth selection (per policy), fit_mean on the grid, fit_cov_surface.
PipelineFit fit_pipeline(const SparseDataset& data, const PipelineOptions& options);

/// The full analysis of one dataset: mean, covariance, noise variance,
/// eigen-decomposition and BLUP scores.
struct Analysis {
  PipelineFit fit;
  NoiseVariance noise;
  EigenSystem eigen;
  Scores scores;
};

Analysis analyze(const SparseDataset& data, const PipelineOptions& options, int k,
                 const BlupOptions& blup = {});

struct ExperimentConfig {
  Design design = Design::sphere;
  int n = 100;
  double m = 5;
  int reps = 100;
  double snr = 5.0;
  std::uint64_t seed = 1;
  bool independent_noise = false;
  WeightScheme weights = WeightScheme::obs_equal;
  PipelineOptions pipeline;
  /// Record wall-clock seconds per rep; off writes 0 so reports are
  /// byte-reproducible.
  bool timing = true;
  int threads = 1;
};

struct RepResult {
  int rep = 0;
  bool ok = false;
  std::string error;
  double rmuie = 0.0;
  double rrmise = 0.0;
  double h_mu = 0.0;
  double h_cov = 0.0;
  double seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RepResult> reps;
  int failures = 0;
  /// Percentages over successful reps.
  double rmuie_mean = 0.0;
  double rmuie_sd = 0.0;
  double rrmise_mean = 0.0;
  double rrmise_sd = 0.0;
  double seconds = 0.0;
};

/// One replication: simulate with seed derive_seed(config.seed, rep), fit,
/// and score against the truth.
RepResult run_rep(const ExperimentConfig& config, int rep);

/// Runs all reps (in parallel when config.threads != 1) and aggregates.
/// Throws NumericalError when more than 5% of reps fail.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Aggregates per-rep values (percent means and standard deviations).
void summarize(ExperimentReport& report);

/// design,n,m,rep,rmuie,rrmise,h_mu,h_cov,seconds (metrics in percent).
std::string report_csv(const ExperimentReport& report, bool header = true);
std::string format_number(double x);

}  // namespace rfda
