#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfda/artifacts.hpp"
#include "rfda/error.hpp"
#include "rfda/stats.hpp"

using namespace rfda;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Settings {
  std::string geometry = "sphere:2";
  std::string input;
  std::string output;
  std::string truth;
  std::string mean;
  std::string cov;
  std::string grid_csv;
  std::string config;
  std::optional<double> h_mu;
  std::optional<double> h_cov;
  int grid = 51;
  int k = 3;
  std::uint64_t seed = 1;
  int reps = 100;
  double snr = 5.0;
  std::string weights = "obs";
  std::string bw = "cv";
  int n = 100;
  double m = 5;
  int threads = 1;
  bool timing = true;
  bool full_table = false;
  bool independent_noise = false;
  bool clamp = false;
  int folds = 5;
  int candidates = 8;
  int cv_grid = 21;
  std::string kernel = "epanechnikov";
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

void write_doc(const std::string& path, const Json& j) { write_text(path, j.dump(1) + "\n"); }

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw ValidationError(std::string("missing required flag ") + flag);
  return value;
}

PipelineOptions pipeline_options(const Settings& s) {
  PipelineOptions o;
  o.grid_points = s.grid;
  o.kernel = parse_kernel(s.kernel);
  o.policy = parse_bandwidth_policy(s.bw);
  o.h_mu = s.h_mu;
  o.h_cov = s.h_cov;
  o.candidates = s.candidates;
  o.folds = s.folds;
  o.cv_seed = s.seed;
  o.cv_grid_points = s.cv_grid;
  o.threads = s.threads;
  return o;
}

CvOptions cv_options(const Settings& s) {
  CvOptions cv;
  cv.folds = s.folds;
  cv.seed = s.seed;
  cv.grid_points = s.cv_grid;
  cv.kernel = parse_kernel(s.kernel);
  cv.threads = s.threads;
  return cv;
}

SparseDataset load_data(const Settings& s) {
  SparseDataset data = read_dataset(require(s.input, "--input"));
  data.weights = parse_weight_scheme(s.weights);
  return data;
}

// An explicit bandwidth wins over the policy.
BandwidthSelection choose(const std::optional<double>& fixed, BandwidthPolicy policy,
                          const char* flag, const std::function<BandwidthSelection()>& cv,
                          const std::function<BandwidthSelection()>& gcv) {
  if (fixed) return {*fixed, {}};
  switch (policy) {
    case BandwidthPolicy::fixed:
      throw ValidationError(std::string("the fixed bandwidth policy needs ") + flag);
    case BandwidthPolicy::cv:
      return cv();
    case BandwidthPolicy::gcv:
      return gcv();
  }
  return {};
}

void cmd_simulate(const Settings& s) {
  SimulationOptions so;
  so.independent_noise = s.independent_noise;
  so.weights = parse_weight_scheme(s.weights);
  const Design design = parse_design(s.geometry);
  const Simulation sim = simulate(design, s.n, s.m, s.snr, s.seed, so);
  std::ostringstream os;
  export_dataset(os, sim.data);
  write_text(s.output, os.str());
  if (!s.truth.empty())
    write_doc(s.truth, truth_to_json(sim.truth, linspace(0.0, 1.0, s.grid)));
}

void check_geometry(const Settings& s, const SparseDataset& data, bool given) {
  if (!given) return;
  const std::string want = design_geometry(parse_design(s.geometry))->descriptor();
  if (want != data.geometry->descriptor())
    throw ValidationError("--geometry " + s.geometry + " does not match the data (" +
                          data.geometry->descriptor() + ")");
}

void cmd_fit_mean(const Settings& s, bool geometry_given) {
  const SparseDataset data = load_data(s);
  check_geometry(s, data, geometry_given);
  const PipelineOptions po = pipeline_options(s);
  const BandwidthSelection sel = choose(
      s.h_mu, po.policy, "--h-mu",
      [&] { return cv_mean(data, default_bandwidth_grid(data, s.candidates), cv_options(s)); },
      [&] { return gcv_mean(data, default_bandwidth_grid(data, s.candidates), cv_options(s)); });
  MeanOptions mo;
  mo.kernel = po.kernel;
  const MeanCurve mean = fit_mean(data, sel.selected, linspace(data.domain_lo, data.domain_hi, s.grid), mo);
  Json j = mean_to_json(mean);
  if (!sel.table.empty()) j["selection"] = selection_to_json(sel);
  write_doc(s.output, j);
}

void cmd_fit_cov(const Settings& s, bool geometry_given) {
  const SparseDataset data = load_data(s);
  check_geometry(s, data, geometry_given);
  const MeanCurve mean = mean_from_json(read_json_file(require(s.mean, "--mean")));
  if (mean.geometry->descriptor() != data.geometry->descriptor())
    throw ValidationError("the mean and the data live on different geometries");
  const PipelineOptions po = pipeline_options(s);
  const BandwidthSelection sel = choose(
      s.h_cov, po.policy, "--h-cov",
      [&] { return cv_cov(data, mean, default_bandwidth_grid(data, s.candidates), cv_options(s)); },
      [&] { return gcv_cov(data, mean, default_bandwidth_grid(data, s.candidates), cv_options(s)); });
  const CovSurface surface = fit_cov_surface(data, mean, sel.selected, {po.kernel, 0.1});
  for (const std::string& w : surface.warnings) std::cerr << "warning: " << w << '\n';
  Json j = surface_to_json(surface);
  j["noise_variance"] = noise_variance(data, mean, surface).sigma2;
  if (!sel.table.empty()) j["selection"] = selection_to_json(sel);
  write_doc(s.output, j);
  if (!s.grid_csv.empty()) write_text(s.grid_csv, gnorm_csv(surface));
}

void cmd_fpca(const Settings& s) {
  const SparseDataset data = load_data(s);
  const CovSurface surface = surface_from_json(read_json_file(require(s.cov, "--cov")));
  const MeanCurve& mean = surface.mean;
  if (mean.geometry->descriptor() != data.geometry->descriptor())
    throw ValidationError("the covariance and the data live on different geometries");
  const NoiseVariance noise = noise_variance(data, mean, surface);
  const EigenSystem eig = eigenpairs(discretize_operator(surface), s.k);
  const Scores scores = blup_scores(data, mean, surface, eig, noise, s.k, {s.clamp});
  write_doc(s.output, Json{{"type", "fpca"},
                           {"noise_variance", noise.sigma2},
                           {"noise_variance_raw", noise.raw},
                           {"eigen", eigen_to_json(eig)},
                           {"scores", scores_to_json(scores)}});
}

void cmd_evaluate(const Settings& s) {
  const Json truth_doc = read_json_file(require(s.truth, "--truth"));
  const SimTruth truth = truth_from_json(truth_doc);
  const CovSurface surface = surface_from_json(read_json_file(require(s.cov, "--cov")));
  const SurfaceError err = surface_error(surface, truth);
  const double mean_err = mean_sup_error(surface.mean, truth);
  std::printf("rMUIE=%.6g rRMISE=%.6g mean_sup_dist=%.6g\n", 100.0 * err.rmuie,
              100.0 * err.rrmise, mean_err);
}

ExperimentConfig experiment_config(const Settings& s) {
  ExperimentConfig c;
  c.design = parse_design(s.geometry);
  c.n = s.n;
  c.m = s.m;
  c.reps = s.reps;
  c.snr = s.snr;
  c.seed = s.seed;
  c.independent_noise = s.independent_noise;
  c.weights = parse_weight_scheme(s.weights);
  c.pipeline = pipeline_options(s);
  c.pipeline.cv_seed = 0;
  c.timing = s.timing;
  c.threads = s.threads;
  return c;
}

std::string summary_line(const ExperimentReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s n=%d m=%g reps=%d failed=%d rMUIE=%.2f (%.2f) rRMISE=%.2f (%.2f)\n",
                std::string(to_string(r.config.design)).c_str(), r.config.n, r.config.m,
                r.config.reps, r.failures, r.rmuie_mean, r.rmuie_sd, r.rrmise_mean, r.rrmise_sd);
  return buf;
}

void cmd_report(const Settings& s) {
  if (!s.input.empty()) {
    const SparseDataset data = load_data(s);
    const Analysis a = analyze(data, pipeline_options(s), s.k, {s.clamp});
    Json j{{"type", "report"},
           {"h_mu", a.fit.mean.bandwidth},
           {"h_cov", a.fit.surface.bandwidth},
           {"noise_variance", a.noise.sigma2},
           {"eigenvalues", vector_to_json(a.eigen.eigenvalues)},
           {"total_variance", a.eigen.total_variance},
           {"scores", scores_to_json(a.scores)}};
    if (a.fit.mean_selection) j["mean_selection"] = selection_to_json(*a.fit.mean_selection);
    if (a.fit.cov_selection) j["cov_selection"] = selection_to_json(*a.fit.cov_selection);
    write_doc(s.output, j);
    return;
  }
  std::vector<ExperimentConfig> configs;
  if (s.full_table) {
    for (const char* design : {"sphere", "spd-lc", "spd-ai"})
      for (int n : {100, 200, 400})
        for (double m : {5.0, 10.0, 20.0, 30.0}) {
          Settings t = s;
          t.geometry = design;
          t.n = n;
          t.m = m;
          configs.push_back(experiment_config(t));
        }
  } else {
    configs.push_back(experiment_config(s));
  }
  std::string csv;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ExperimentReport r = run_experiment(configs[i]);
    csv += report_csv(r, i == 0);
    std::cerr << summary_line(r);
  }
  write_text(s.output, csv);
}

// Values from the JSON config replace whatever the command line said.
void apply_config(CLI::App& app, CLI::App& sub, const std::string& path) {
  const Json j = read_json_file(path);
  if (!j.is_object()) throw ValidationError("the config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    const std::string flag = (key.size() == 1 ? "-" : "--") + key;
    CLI::Option* opt = sub.get_option_no_throw(flag);
    if (!opt) opt = app.get_option_no_throw(flag);
    if (!opt) throw ValidationError("unknown config key '" + key + "'");
    std::string text;
    if (value.is_string())
      text = value.get<std::string>();
    else if (value.is_boolean())
      text = value.get<bool>() ? "true" : "false";
    else if (value.is_number())
      text = value.dump();
    else
      throw ValidationError("config key '" + key + "' must be a string, number or boolean");
    opt->clear();
    opt->add_result(text);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intrinsic functional data analysis of sparse manifold-valued curves"};
  app.require_subcommand(1);
  Settings s;

  auto* simulate = app.add_subcommand("simulate", "simulate a design and write the dataset");
  auto* fit_mean_cmd = app.add_subcommand("fit-mean", "fit the Fréchet mean curve");
  auto* fit_cov_cmd = app.add_subcommand("fit-cov", "fit the covariance surface");
  auto* fpca = app.add_subcommand("fpca", "eigen-decomposition and BLUP scores");
  auto* evaluate = app.add_subcommand("evaluate", "score a covariance surface against the truth");
  auto* report = app.add_subcommand("report", "run experiments, or analyze one dataset with --input");

  const auto common = [&](CLI::App* c) {
    c->add_option("--config", s.config, "JSON file whose keys override the flags");
    c->add_option("--output", s.output, "output file (stdout when omitted)");
    c->add_option("--threads", s.threads, "worker threads (0 = all cores)");
  };
  const auto fitting = [&](CLI::App* c) {
    c->add_option("--input", s.input, "dataset in JSON lines");
    c->add_option("--grid", s.grid, "evaluation grid size")->check(CLI::Range(2, 100000));
    c->add_option("--weights", s.weights, "subject weighting")->check(CLI::IsMember({"obs", "subject"}));
    c->add_option("--bw", s.bw, "bandwidth policy")->check(CLI::IsMember({"fixed", "cv", "gcv"}));
    c->add_option("--seed", s.seed, "seed for the CV folds");
    c->add_option("--folds", s.folds, "CV folds")->check(CLI::Range(2, 1000));
    c->add_option("--candidates", s.candidates, "bandwidth candidates")->check(CLI::Range(1, 1000));
    c->add_option("--cv-grid", s.cv_grid, "grid size used inside covariance CV")->check(CLI::Range(2, 100000));
    c->add_option("--kernel", s.kernel, "smoothing kernel")
        ->check(CLI::IsMember({"epanechnikov", "gaussian-truncated"}));
  };

  for (auto* c : {simulate, fit_mean_cmd, fit_cov_cmd, fpca, evaluate, report}) common(c);
  for (auto* c : {fit_mean_cmd, fit_cov_cmd, fpca, report}) fitting(c);
  for (auto* c : {simulate, fit_mean_cmd, fit_cov_cmd, report})
    c->add_option("--geometry", s.geometry, "design or geometry (sphere, spd-lc, spd-ai, euclidean)");

  simulate->add_option("-n", s.n, "subjects")->check(CLI::Range(1, 10000000));
  simulate->add_option("-m", s.m, "mean extra observations per subject")->check(CLI::Range(0.0, 500.0));
  simulate->add_option("--seed", s.seed, "master seed");
  simulate->add_option("--snr", s.snr, "signal-to-noise ratio")->check(CLI::PositiveNumber);
  simulate->add_option("--weights", s.weights, "subject weighting")->check(CLI::IsMember({"obs", "subject"}));
  simulate->add_option("--truth", s.truth, "write the true mean and covariance here");
  simulate->add_option("--grid", s.grid, "grid of the truth document")->check(CLI::Range(2, 100000));
  simulate->add_flag("--independent-noise", s.independent_noise, "independent noise per coordinate");

  fit_mean_cmd->add_option("--h-mu", s.h_mu, "mean bandwidth")->check(CLI::PositiveNumber);
  fit_cov_cmd->add_option("--h-cov", s.h_cov, "covariance bandwidth")->check(CLI::PositiveNumber);
  fit_cov_cmd->add_option("--mean", s.mean, "mean document from fit-mean");
  fit_cov_cmd->add_option("--grid-csv", s.grid_csv, "write s,t,||C(s,t)||_G here");

  fpca->add_option("--cov", s.cov, "covariance document from fit-cov");
  fpca->add_option("--k", s.k, "number of components")->check(CLI::PositiveNumber);
  fpca->add_flag("--clamp", s.clamp, "lift the spectrum of each subject's covariance to the noise level");

  evaluate->add_option("--truth", s.truth, "truth document from simulate");
  evaluate->add_option("--cov", s.cov, "covariance document to score");

  report->add_option("--h-mu", s.h_mu, "mean bandwidth")->check(CLI::PositiveNumber);
  report->add_option("--h-cov", s.h_cov, "covariance bandwidth")->check(CLI::PositiveNumber);
  report->add_option("--k", s.k, "components (with --input)")->check(CLI::PositiveNumber);
  report->add_flag("--clamp", s.clamp, "lift the spectrum of each subject's covariance to the noise level");
  report->add_option("-n", s.n, "subjects")->check(CLI::Range(1, 10000000));
  report->add_option("-m", s.m, "mean extra observations per subject")->check(CLI::Range(0.0, 500.0));
  report->add_option("--reps", s.reps, "replications")->check(CLI::Range(1, 1000000));
  report->add_option("--snr", s.snr, "signal-to-noise ratio")->check(CLI::PositiveNumber);
  report->add_option("--timing", s.timing, "record seconds per rep (off for byte-identical reports)");
  report->add_flag("--full-table", s.full_table, "sweep every design, n in {100,200,400}, m in {5,10,20,30}");
  report->add_flag("--independent-noise", s.independent_noise, "independent noise per coordinate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!s.config.empty()) apply_config(app, *sub, s.config);
    const CLI::Option* geometry_opt = sub->get_option_no_throw("--geometry");
    const bool geometry_given = geometry_opt && geometry_opt->count() > 0;
    if (sub == simulate) cmd_simulate(s);
    else if (sub == fit_mean_cmd) cmd_fit_mean(s, geometry_given);
    else if (sub == fit_cov_cmd) cmd_fit_cov(s, geometry_given);
    else if (sub == fpca) cmd_fpca(s);
    else if (sub == evaluate) cmd_evaluate(s);
    else cmd_report(s);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
