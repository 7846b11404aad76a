#include "rfda/artifacts.hpp"

#include <sstream>

#include "rfda/error.hpp"

namespace rfda {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(std::string("document lacks the field '") + key + "'");
  return j.at(key);
}

std::vector<double> doubles(const Json& j) {
  if (!j.is_array()) throw ValidationError("expected an array of numbers");
  std::vector<double> out;
  for (const Json& x : j) {
    if (!x.is_number()) throw ValidationError("expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

Json mean_to_json(const MeanCurve& mean) {
  const Geometry& geom = *mean.geometry;
  Json points = Json::array(), frames = Json::array(), diag = Json::array();
  for (std::size_t g = 0; g < mean.size(); ++g) {
    points.push_back(point_to_json(geom, mean.points[g]));
    frames.push_back(frame_to_json(geom, mean.frames[g]));
  }
  for (const MeanDiagnostics& d : mean.diagnostics)
    diag.push_back({{"gradient_norm", d.gradient_norm},
                    {"iterations", d.iterations},
                    {"converged", d.converged}});
  return Json{{"type", "mean"},
              {"geometry", geom.descriptor()},
              {"kernel", std::string(to_string(mean.kernel))},
              {"bandwidth", mean.bandwidth},
              {"grid", mean.grid},
              {"points", points},
              {"frames", frames},
              {"diagnostics", diag}};
}

MeanCurve mean_from_json(const Json& doc) {
  const Json& j = doc.is_object() && doc.contains("mean") ? doc.at("mean") : doc;
  MeanCurve m;
  try {
    m.geometry = make_geometry(field(j, "geometry").get<std::string>());
    m.kernel = parse_kernel(field(j, "kernel").get<std::string>());
    m.bandwidth = field(j, "bandwidth").get<double>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed mean document: ") + e.what());
  }
  m.grid = doubles(field(j, "grid"));
  const Json& pts = field(j, "points");
  const Json& frs = field(j, "frames");
  if (m.grid.size() < 2 || pts.size() != m.grid.size() || frs.size() != m.grid.size())
    throw ValidationError("mean document: grid, points and frames must have equal length >= 2");
  for (std::size_t g = 0; g < m.grid.size(); ++g) {
    if (g > 0 && !(m.grid[g] > m.grid[g - 1]))
      throw ValidationError("mean document: grid must be increasing");
    m.points.push_back(point_from_json(*m.geometry, pts[g]));
    m.frames.push_back(frame_from_json(*m.geometry, m.points.back(), frs[g]));
  }
  if (j.contains("diagnostics"))
    for (const Json& d : j.at("diagnostics"))
      m.diagnostics.push_back({d.value("gradient_norm", 0.0), d.value("iterations", 0),
                               d.value("converged", false)});
  return m;
}

Json surface_to_json(const CovSurface& s) {
  Json cells = Json::array();
  for (const Mat& c : s.cells) cells.push_back(matrix_to_json(c));
  return Json{{"type", "covariance"},
              {"bandwidth", s.bandwidth},
              {"kernel", std::string(to_string(s.kernel))},
              {"mean", mean_to_json(s.mean)},
              {"cells", cells},
              {"failed_cells", s.failed_cells},
              {"warnings", s.warnings}};
}

CovSurface surface_from_json(const Json& j) {
  CovSurface s;
  s.mean = mean_from_json(field(j, "mean"));
  try {
    s.bandwidth = field(j, "bandwidth").get<double>();
    s.kernel = parse_kernel(field(j, "kernel").get<std::string>());
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed covariance document: ") + e.what());
  }
  const Json& cells = field(j, "cells");
  const std::size_t G = s.mean.size();
  const auto d = static_cast<Eigen::Index>(s.mean.geometry->dim());
  if (!cells.is_array() || cells.size() != G * G)
    throw ValidationError("covariance document: expected G*G cells");
  for (const Json& c : cells) {
    Mat a = matrix_from_json(c);
    if (a.rows() != d || a.cols() != d) throw ValidationError("covariance document: cell is not d x d");
    s.cells.push_back(std::move(a));
  }
  s.diagnostics.assign(G * G, CellDiagnostics{});
  for (CellDiagnostics& c : s.diagnostics) c.ok = true;
  return s;
}

CovSurface truth_surface(const SimTruth& truth, const std::vector<double>& grid) {
  CovSurface s;
  MeanCurve& m = s.mean;
  m.geometry = truth.geometry();
  m.grid = grid;
  for (double t : grid) {
    m.points.push_back(truth.mean(t));
    m.frames.push_back(truth.frame(t));
  }
  m.diagnostics.assign(grid.size(), MeanDiagnostics{0.0, 0, true});
  for (double a : grid)
    for (double b : grid) s.cells.push_back(truth.covariance_coefficients(a, b));
  s.diagnostics.assign(s.cells.size(), CellDiagnostics{});
  for (CellDiagnostics& c : s.diagnostics) c.ok = true;
  return s;
}

Json truth_to_json(const SimTruth& truth, const std::vector<double>& grid) {
  Json j = surface_to_json(truth_surface(truth, grid));
  j["type"] = "truth";
  j["design"] = std::string(to_string(truth.design()));
  j["noise_half_width"] = truth.noise_half_width();
  j["snr"] = truth.snr();
  return j;
}

SimTruth truth_from_json(const Json& j) {
  try {
    return SimTruth(parse_design(field(j, "design").get<std::string>()),
                    field(j, "noise_half_width").get<double>(), field(j, "snr").get<double>());
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed truth document: ") + e.what());
  }
}

Json eigen_to_json(const EigenSystem& eig) {
  Json fields = Json::array();
  for (const Mat& f : eig.fields) fields.push_back(matrix_to_json(f));
  return Json{{"grid", eig.grid},
              {"dim", eig.dim},
              {"eigenvalues", vector_to_json(eig.eigenvalues)},
              {"fields", fields},
              {"total_variance", eig.total_variance},
              {"most_negative", eig.most_negative}};
}

Json scores_to_json(const Scores& scores) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < scores.ids.size(); ++i) {
    Json r{{"id", scores.ids[i]},
           {"xi", vector_to_json(scores.xi.row(static_cast<Eigen::Index>(i)).transpose())}};
    if (i < scores.diagnostics.size()) {
      r["min_eigenvalue"] = scores.diagnostics[i].min_eigenvalue;
      r["condition"] = scores.diagnostics[i].condition;
      r["clamped"] = scores.diagnostics[i].clamped;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

Json selection_to_json(const BandwidthSelection& sel) {
  Json table = Json::array();
  for (const RiskRow& r : sel.table) table.push_back({{"h", r.h}, {"risk", r.risk}, {"ok", r.ok}});
  return Json{{"selected", sel.selected}, {"table", table}};
}

std::string gnorm_csv(const CovSurface& surface) {
  const Mat n = surface.gnorm_grid();
  const auto& grid = surface.mean.grid;
  std::ostringstream os;
  os << "s,t,gnorm\n";
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t h = 0; h < grid.size(); ++h)
      os << format_number(grid[g]) << ',' << format_number(grid[h]) << ','
         << format_number(n(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h))) << '\n';
  return os.str();
}

}  // namespace rfda
